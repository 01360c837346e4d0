//! Cross-validated sweeps over sparsity weight, clause count and algorithm.

mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{stratified_folds, BinarizationPlan, BinaryDataset, FoldPlan, RawDataset, DEFAULT_QUANTILES};
use crate::error::{Error, Result};
use crate::learners::{learn, Algorithm, LearnConfig};
use crate::par::{self, Parallelism};
use crate::rule_model::{error_rate, Form};

pub use report::{
    cell_summaries, min_error_table, pareto_front, pareto_points, write_csv, write_jsonl, write_timings, CellSummary,
    MinErrorRow, ParetoFront, ParetoPoint, Split,
};

pub const RECORD_FORMAT: &str = "boolrule.sweep-record";
pub const RECORD_VERSION: u32 = 1;

/// `A x 10^B` for `A` in {1, 2, 5} and `B` in -4..=1, ascending.
pub fn default_thetas() -> Vec<f64> {
    let mut out = Vec::with_capacity(18);
    for b in -4..=1 {
        for a in [1, 2, 5] {
            out.push(format!("{a}e{b}").parse().expect("valid literal"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub thetas: Vec<f64>,
    #[serde(rename = "R")]
    pub rs: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub folds: usize,
    pub seed: u64,
    pub form: Form,
    pub allow_disable: bool,
    pub quantiles: usize,
    /// Fit quantile thresholds on the whole dataset instead of each
    /// training fold.
    pub global_binarize: bool,
    pub max_iters: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            thetas: default_thetas(),
            rs: (1..=5).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            folds: 10,
            seed: 0,
            form: Form::Dnf,
            allow_disable: false,
            quantiles: DEFAULT_QUANTILES,
            global_binarize: false,
            max_iters: 100,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.rs.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("sweep grid has an empty axis".into()));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid theta {t}")));
        }
        if self.rs.contains(&0) {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.algorithms.len() * self.thetas.len() * self.rs.len() * self.folds
    }

    fn learn_config(&self, theta: f64, r: usize) -> LearnConfig {
        LearnConfig {
            theta,
            r,
            form: self.form,
            allow_disable: self.allow_disable,
            max_iters: self.max_iters,
            seed: self.seed,
            ..LearnConfig::default()
        }
    }
}

/// Outcome of one `(algorithm, theta, R, fold)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub algorithm: Algorithm,
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: usize,
    pub fold: usize,
    pub train_error: Option<f64>,
    pub test_error: Option<f64>,
    /// Selected non-disable columns summed over clauses.
    pub feature_count: Option<usize>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall time in milliseconds; kept out of the JSON-lines file so that
    /// results are byte-identical across runs.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    pub parallelism: Parallelism,
    pub workers: Option<usize>,
}

/// Train and test data of one fold.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train: BinaryDataset,
    pub test: BinaryDataset,
    pub plan: BinarizationPlan,
}

/// Binarizes every fold; thresholds come from the training rows unless
/// `global_binarize` is set.
pub fn prepare_folds(raw: &RawDataset, grid: &SweepGrid) -> Result<(FoldPlan, Vec<FoldData>)> {
    let folds = stratified_folds(raw.labels(), grid.folds, grid.seed)?;
    let all: Vec<usize> = (0..raw.len()).collect();
    let global = if grid.global_binarize {
        Some(BinarizationPlan::fit(raw, &all, grid.quantiles)?)
    } else {
        None
    };
    let data = (0..grid.folds)
        .map(|f| {
            let train_rows = folds.train_indices(f);
            let test_rows = folds.test_indices(f);
            let plan = match &global {
                Some(p) => p.clone(),
                None => BinarizationPlan::fit(raw, &train_rows, grid.quantiles)?,
            };
            let mut train = plan.apply(raw, &train_rows)?;
            let mut test = plan.apply(raw, &test_rows)?;
            if grid.allow_disable {
                train = train.append_disable_column()?;
                test = test.append_disable_column()?;
            }
            Ok(FoldData { train, test, plan })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((folds, data))
}

/// Runs every cell of `grid`. Cell failures are recorded, not propagated;
/// records come back in canonical order (algorithm, theta, R, fold).
pub fn run_sweep(raw: &RawDataset, grid: &SweepGrid, opts: SweepOptions) -> Result<SweepResult> {
    grid.validate()?;
    let (_, folds) = prepare_folds(raw, grid)?;
    let mut algorithms = grid.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let mut thetas = grid.thetas.clone();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let mut rs = grid.rs.clone();
    rs.sort_unstable();
    rs.dedup();

    let mut cells = Vec::with_capacity(grid.num_cells());
    for &a in &algorithms {
        for &t in &thetas {
            for &r in &rs {
                for f in 0..grid.folds {
                    cells.push((a, t, r, f));
                }
            }
        }
    }
    log::info!("sweep: {} cells", cells.len());
    let records = par::map(cells.len(), opts.parallelism, opts.workers, |k| {
        let (a, t, r, f) = cells[k];
        run_cell(&folds[f], a, &grid.learn_config(t, r), f)
    });
    Ok(SweepResult {
        grid: grid.clone(),
        records,
    })
}

/// Trains one configuration on a fold and scores it.
pub fn run_cell(fold: &FoldData, algorithm: Algorithm, cfg: &LearnConfig, fold_index: usize) -> SweepRecord {
    let start = Instant::now();
    let outcome = learn(&fold.train, algorithm, cfg).and_then(|l| {
        let train = error_rate(&fold.train, &l.rule)?;
        let test = error_rate(&fold.test, &l.rule)?;
        Ok((train, test, l.rule.feature_count(&fold.train), l.trace.iterations()))
    });
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rec = SweepRecord {
        algorithm,
        theta: cfg.theta,
        r: cfg.r,
        fold: fold_index,
        train_error: None,
        test_error: None,
        feature_count: None,
        iterations: 0,
        error: None,
        wall_time_ms,
    };
    match outcome {
        Ok((train, test, features, iterations)) => {
            rec.train_error = Some(train);
            rec.test_error = Some(test);
            rec.feature_count = Some(features);
            rec.iterations = iterations;
        }
        Err(e) => {
            log::warn!("{algorithm} theta={} R={} fold={fold_index}: {e}", cfg.theta, cfg.r);
            rec.error = Some(e.to_string());
        }
    }
    rec
}
