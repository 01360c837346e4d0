use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("non-binary label at row {row}: '{value}'")]
    NonBinaryLabel { row: usize, value: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("arity mismatch: expected {expected} columns, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("dataset already has a disable column")]
    DisableColumnPresent,

    #[error("class {class} has {count} samples, fewer than the {k} folds requested")]
    TooFewSamples { class: u8, count: usize, k: usize },

    #[error("column {column} has no negation column")]
    MissingNegation { column: usize },

    #[error("ideal outputs inconsistent with label at sample {sample}")]
    InconsistentIdealOutputs { sample: usize },

    #[error("rule form mismatch: {0}")]
    FormMismatch(String),

    #[error("redundancy metadata inconsistent with data: {0}")]
    InconsistentMetadata(String),

    #[error("lp error: {0}")]
    Lp(#[from] crate::lp::LpError),

    #[error("lp solve did not reach optimality: {0:?}")]
    LpNotOptimal(crate::lp::LpStatus),

    #[error("unsupported format version {found} for {what} (expected {expected})")]
    Version {
        what: &'static str,
        found: u32,
        expected: u32,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
