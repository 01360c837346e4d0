use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{SweepRecord, SweepResult, RECORD_FORMAT, RECORD_VERSION};
use crate::error::Result;
use crate::learners::Algorithm;

/// Fold-averaged metrics of one `(algorithm, theta, R)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: usize,
    pub folds: usize,
    pub failed_folds: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub feature_count: f64,
}

/// Averages records over folds. Cells with a failed fold are kept but flagged
/// through `failed_folds`; their means cover the successful folds only.
pub fn cell_summaries(records: &[SweepRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(Algorithm, u64, usize), Vec<&SweepRecord>> = BTreeMap::new();
    for rec in records {
        cells
            .entry((rec.algorithm, ordered_bits(rec.theta), rec.r))
            .or_default()
            .push(rec);
    }
    cells
        .into_values()
        .map(|recs| {
            let ok: Vec<&&SweepRecord> = recs.iter().filter(|r| r.is_ok()).collect();
            let k = ok.len().max(1) as f64;
            CellSummary {
                algorithm: recs[0].algorithm,
                theta: recs[0].theta,
                r: recs[0].r,
                folds: ok.len(),
                failed_folds: recs.len() - ok.len(),
                train_error: ok.iter().filter_map(|r| r.train_error).sum::<f64>() / k,
                test_error: ok.iter().filter_map(|r| r.test_error).sum::<f64>() / k,
                feature_count: ok.iter().filter_map(|r| r.feature_count).sum::<usize>() as f64 / k,
            }
        })
        .collect()
}

/// Sort key of a non-negative float that orders like the float itself.
fn ordered_bits(x: f64) -> u64 {
    x.to_bits()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinErrorRow {
    pub algorithm: Algorithm,
    #[serde(rename = "R")]
    pub r: usize,
    /// Sparsity weight attaining the minimum (the smallest such weight).
    pub theta: f64,
    pub test_error: f64,
    pub train_error: f64,
    pub feature_count: f64,
    /// Lowest test error of this algorithm over all `R`.
    pub best: bool,
}

/// Minimum over theta of the fold-averaged test error, per algorithm and `R`.
/// Cells with failed folds do not compete.
pub fn min_error_table(res: &SweepResult) -> Vec<MinErrorRow> {
    let mut rows: BTreeMap<(Algorithm, usize), MinErrorRow> = BTreeMap::new();
    for s in cell_summaries(&res.records) {
        if s.failed_folds > 0 || s.folds == 0 {
            continue;
        }
        let row = MinErrorRow {
            algorithm: s.algorithm,
            r: s.r,
            theta: s.theta,
            test_error: s.test_error,
            train_error: s.train_error,
            feature_count: s.feature_count,
            best: false,
        };
        rows.entry((s.algorithm, s.r))
            .and_modify(|cur| {
                if s.test_error < cur.test_error {
                    *cur = row.clone();
                }
            })
            .or_insert(row);
    }
    let mut out: Vec<MinErrorRow> = rows.into_values().collect();
    let mut best: BTreeMap<Algorithm, usize> = BTreeMap::new();
    for (k, row) in out.iter().enumerate() {
        match best.get(&row.algorithm) {
            Some(&b) if out[b].test_error <= row.test_error => {}
            _ => {
                best.insert(row.algorithm, k);
            }
        }
    }
    for k in best.into_values() {
        out[k].best = true;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub feature_count: f64,
    pub error: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub algorithm: Algorithm,
    #[serde(rename = "R")]
    pub r: usize,
    pub split: Split,
    /// Increasing feature count, strictly decreasing error.
    pub points: Vec<ParetoPoint>,
}

impl ParetoFront {
    /// Best error reachable with at most `budget` features, if any point fits.
    pub fn error_at(&self, budget: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.feature_count <= budget + 1e-12)
            .map(|p| p.error)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
    }
}

/// Non-dominated subset of `points`, both coordinates minimized; among
/// duplicates the smaller theta is kept.
pub fn pareto_points(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.feature_count
            .total_cmp(&b.feature_count)
            .then(a.error.total_cmp(&b.error))
            .then(a.theta.total_cmp(&b.theta))
    });
    let mut front: Vec<ParetoPoint> = Vec::new();
    for p in sorted {
        if front.last().is_none_or(|last| p.error < last.error) {
            front.push(p);
        }
    }
    front
}

/// Front over theta of fold-averaged `(feature count, error)` for one
/// algorithm and clause count.
pub fn pareto_front(res: &SweepResult, algorithm: Algorithm, r: usize, split: Split) -> ParetoFront {
    let points: Vec<ParetoPoint> = cell_summaries(&res.records)
        .into_iter()
        .filter(|s| s.algorithm == algorithm && s.r == r && s.failed_folds == 0 && s.folds > 0)
        .map(|s| ParetoPoint {
            feature_count: s.feature_count,
            error: match split {
                Split::Train => s.train_error,
                Split::Test => s.test_error,
            },
            theta: s.theta,
        })
        .collect();
    ParetoFront {
        algorithm,
        r,
        split,
        points: pareto_points(&points),
    }
}

#[derive(Serialize)]
struct VersionedRecord<'a> {
    format: &'static str,
    version: u32,
    #[serde(flatten)]
    record: &'a SweepRecord,
}

/// One JSON object per line, in the given order.
pub fn write_jsonl<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    for record in records {
        let line = serde_json::to_string(&VersionedRecord {
            format: RECORD_FORMAT,
            version: RECORD_VERSION,
            record,
        })?;
        writeln!(out, "{line}").map_err(|e| crate::Error::io("<jsonl>", e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Timing {
    algorithm: Algorithm,
    theta: f64,
    #[serde(rename = "R")]
    r: usize,
    fold: usize,
    wall_time_ms: f64,
}

/// Per-cell wall times, one JSON object per line.
pub fn write_timings<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(&Timing {
            algorithm: r.algorithm,
            theta: r.theta,
            r: r.r,
            fold: r.fold,
            wall_time_ms: r.wall_time_ms,
        })?;
        writeln!(out, "{line}").map_err(|e| crate::Error::io("<timings>", e))?;
    }
    Ok(())
}

/// Flat rows as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| crate::Error::io("<csv>", e))?;
    Ok(())
}
