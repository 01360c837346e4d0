pub mod binarization;
pub mod data;
pub mod error;
pub mod learners;
pub mod lp;
pub mod par;
pub mod rule_model;
pub mod sweep;

pub use error::{Error, Result};
