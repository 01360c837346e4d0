//! Quantile binarization of raw features.
//!
//! A continuous feature with thresholds `t_1 < ... < t_T` becomes `2T`
//! columns: `c <= t_1 .. c <= t_T`, then `c > t_1 .. c > t_T`. A binary
//! feature becomes `x, NOT x`; each category of a categorical feature becomes
//! `c == v, c != v`. Thresholds are fitted on one set of rows and can be
//! applied to any other, so test folds never influence their own cut points.

use serde::{Deserialize, Serialize};

use super::binary::{BinaryDataset, Direction, FeatureMeta};
use super::raw::{RawColumn, RawDataset};
use crate::error::{Error, Result};

/// Default number of quantile cuts per continuous feature (deciles).
pub const DEFAULT_QUANTILES: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeaturePlan {
    Continuous { origin: usize, thresholds: Vec<f64> },
    Binary { origin: usize },
    Categorical { origin: usize, categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarizationPlan {
    pub quantiles: usize,
    pub origin_names: Vec<String>,
    pub features: Vec<FeaturePlan>,
    /// Raw features that produced no usable column.
    pub dropped: Vec<usize>,
}

/// Empirical quantile at probability `p` of sorted `values`, interpolating
/// linearly between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `Q` cut points at probabilities `q / (Q + 1)`, deduplicated, keeping only
/// cuts strictly below the maximum (a cut at the maximum gives constant columns).
pub fn quantile_thresholds(values: &[f64], q: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().expect("non-empty");
    let mut out: Vec<f64> = (1..=q)
        .map(|k| quantile(&sorted, k as f64 / (q + 1) as f64))
        .filter(|&t| t < max)
        .collect();
    out.dedup();
    out
}

impl BinarizationPlan {
    /// Fits thresholds and category lists on the rows in `rows`.
    pub fn fit(raw: &RawDataset, rows: &[usize], q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("quantile count must be at least 1".into()));
        }
        if raw.is_empty() || rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut features = Vec::new();
        let mut dropped = Vec::new();
        for (origin, feat) in raw.features().iter().enumerate() {
            let plan = match &feat.column {
                RawColumn::Continuous(v) => {
                    let vals: Vec<f64> = rows.iter().map(|&i| v[i]).collect();
                    let first = vals[0];
                    if vals.iter().all(|&x| x == first) {
                        None
                    } else {
                        Some(FeaturePlan::Continuous {
                            origin,
                            thresholds: quantile_thresholds(&vals, q),
                        })
                    }
                }
                RawColumn::Binary(v) => {
                    let first = v[rows[0]];
                    rows.iter()
                        .any(|&i| v[i] != first)
                        .then_some(FeaturePlan::Binary { origin })
                }
                RawColumn::Categorical(v) => {
                    let mut cats: Vec<String> = rows.iter().map(|&i| v[i].clone()).collect();
                    cats.sort();
                    cats.dedup();
                    (cats.len() >= 2).then_some(FeaturePlan::Categorical {
                        origin,
                        categories: cats,
                    })
                }
            };
            match plan {
                Some(p) => features.push(p),
                None => {
                    log::warn!("feature '{}' takes a single value; dropped", feat.name);
                    dropped.push(origin);
                }
            }
        }
        Ok(Self {
            quantiles: q,
            origin_names: raw.feature_names(),
            features,
            dropped,
        })
    }

    pub fn columns(&self) -> Vec<FeatureMeta> {
        let mut out = Vec::new();
        for f in &self.features {
            match f {
                FeaturePlan::Continuous { origin, thresholds } => {
                    for dir in [Direction::Leq, Direction::Gt] {
                        out.extend(thresholds.iter().map(|&t| FeatureMeta::thresholded(*origin, t, dir)));
                    }
                }
                FeaturePlan::Binary { origin } => {
                    out.push(FeatureMeta::flag(*origin, Direction::Gt));
                    out.push(FeatureMeta::flag(*origin, Direction::Leq));
                }
                FeaturePlan::Categorical { origin, categories } => {
                    for c in categories {
                        out.push(FeatureMeta::category(*origin, c.clone(), Direction::Gt));
                        out.push(FeatureMeta::category(*origin, c.clone(), Direction::Leq));
                    }
                }
            }
        }
        out
    }

    /// Binarizes `rows` of `raw` with this plan's cut points.
    pub fn apply(&self, raw: &RawDataset, rows: &[usize]) -> Result<BinaryDataset> {
        if raw.feature_names() != self.origin_names {
            return Err(Error::Schema("raw features differ from the fitted plan".into()));
        }
        let columns = self.columns();
        let mut matrix = vec![Vec::with_capacity(columns.len()); rows.len()];
        for f in &self.features {
            match f {
                FeaturePlan::Continuous { origin, thresholds } => {
                    let RawColumn::Continuous(v) = &raw.features()[*origin].column else {
                        return Err(Error::Schema(format!("feature {origin} is not continuous")));
                    };
                    for (r, &i) in rows.iter().enumerate() {
                        let x = v[i];
                        matrix[r].extend(thresholds.iter().map(|&t| (x <= t) as u8));
                        matrix[r].extend(thresholds.iter().map(|&t| (x > t) as u8));
                    }
                }
                FeaturePlan::Binary { origin } => {
                    let RawColumn::Binary(v) = &raw.features()[*origin].column else {
                        return Err(Error::Schema(format!("feature {origin} is not binary")));
                    };
                    for (r, &i) in rows.iter().enumerate() {
                        let x = v[i] as u8;
                        matrix[r].extend([x, 1 - x]);
                    }
                }
                FeaturePlan::Categorical { origin, categories } => {
                    let RawColumn::Categorical(v) = &raw.features()[*origin].column else {
                        return Err(Error::Schema(format!("feature {origin} is not categorical")));
                    };
                    for (r, &i) in rows.iter().enumerate() {
                        for c in categories {
                            let x = (&v[i] == c) as u8;
                            matrix[r].extend([x, 1 - x]);
                        }
                    }
                }
            }
        }
        let labels = rows.iter().map(|&i| raw.labels()[i]).collect();
        BinaryDataset::new(matrix, labels, columns, self.origin_names.clone())
    }
}

/// Fits quantile thresholds on the whole dataset and binarizes it.
pub fn binarize(raw: &RawDataset, q: usize) -> Result<BinaryDataset> {
    let rows: Vec<usize> = (0..raw.len()).collect();
    BinarizationPlan::fit(raw, &rows, q)?.apply(raw, &rows)
}
