//! Dataset ingestion, binarization and cross-validation folds.

mod binary;
mod folds;
mod quantize;
mod raw;

pub use binary::{negation_map, BinaryDataset, Direction, FeatureMeta, GroupKey, DATASET_FORMAT, DATASET_VERSION};
pub use folds::{stratified_folds, FoldPlan};
pub use quantize::{binarize, quantile, quantile_thresholds, BinarizationPlan, FeaturePlan, DEFAULT_QUANTILES};
pub use raw::{load_csv, load_csv_maybe_unlabeled, parse_csv, ColumnKind, RawColumn, RawDataset, RawFeature, RawValue, Schema};
