//! Rule learners. Everything is learned as CNF; a DNF rule is a CNF rule
//! learned on the negated dataset and read back with the same column indices.

mod am;
mod bcd;
mod one_level;
mod set_cover;
mod tlp;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binarization::{BinarizeOptions, GroupOrder, Objective, Placeholder, Regime, Verify, SIMPLE_THRESHOLD};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::SolveLimits;
use crate::rule_model::{ColumnCosts, Form, TwoLevelRule};

pub use crate::binarization::FractionalSolution;
pub use am::{am_update_v, learn_am};
pub use bcd::{bcd_filter_samples, learn_bcd};
pub use one_level::{learn_one_level, ClauseBinarizer};
pub use set_cover::learn_set_cover;
pub use tlp::{learn_tlp, tlp_program, TlpProgram};

/// Order in which BCD tries clause updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateOrder {
    /// Try every clause, keep the best.
    #[default]
    Greedy,
    Cyclic,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: usize,
    pub form: Form,
    /// Whether clauses may select the disable column. Requires a dataset
    /// built with [`BinaryDataset::append_disable_column`].
    pub allow_disable: bool,
    pub max_iters: usize,
    pub seed: u64,
    /// Per-column sparsity weights; defaults to 1 per feature and 0 for the
    /// disable column.
    pub column_costs: Option<ColumnCosts>,
    /// Set cover rounds with this threshold instead of the redundancy-aware
    /// sweep when present.
    pub simple_threshold: Option<f64>,
    pub update_order: UpdateOrder,
    pub placeholder: Placeholder,
    pub group_order: GroupOrder,
    pub lp_iteration_limit: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            theta: 1e-3,
            r: 1,
            form: Form::Cnf,
            allow_disable: false,
            max_iters: 100,
            seed: 0,
            column_costs: None,
            simple_threshold: None,
            update_order: UpdateOrder::Greedy,
            placeholder: Placeholder::Fractional,
            group_order: GroupOrder::PerClause,
            lp_iteration_limit: SolveLimits::default().max_iters,
        }
    }
}

impl LearnConfig {
    pub fn new(theta: f64, r: usize) -> Self {
        Self {
            theta,
            r,
            ..Self::default()
        }
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("theta must be finite and >= 0, got {}", self.theta)));
        }
        if self.r == 0 {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn limits(&self) -> SolveLimits {
        SolveLimits {
            max_iters: self.lp_iteration_limit,
        }
    }

    pub(crate) fn binarize_options(&self, objective: Objective) -> BinarizeOptions {
        BinarizeOptions {
            objective,
            placeholder: self.placeholder,
            order: self.group_order,
            verify: Verify::Fast,
            regime: Some(self.regime()),
        }
    }

    pub(crate) fn regime(&self) -> Regime {
        if self.allow_disable {
            Regime::Disable
        } else {
            Regime::NoDisable
        }
    }

    /// Column costs in the column order of `ds`.
    pub(crate) fn costs_for(&self, ds: &BinaryDataset) -> Result<ColumnCosts> {
        let costs = match &self.column_costs {
            Some(c) => c.clone(),
            None => ColumnCosts::for_dataset(ds),
        };
        if costs.0.len() != ds.num_columns() {
            return Err(Error::ArityMismatch {
                expected: ds.num_columns(),
                actual: costs.0.len(),
            });
        }
        Ok(costs)
    }

    /// Upper bound of every weight: 0 for a disable column that may not be
    /// used, 1 otherwise.
    pub(crate) fn weight_caps(&self, ds: &BinaryDataset) -> Vec<f64> {
        ds.columns()
            .iter()
            .map(|m| if m.is_disable && !self.allow_disable { 0.0 } else { 1.0 })
            .collect()
    }
}

/// Which phase produced a trace record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    ClauseUpdate,
    Alternation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Joint (minimal Hamming) cost after the step.
    pub objective: f64,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnTrace {
    pub records: Vec<TraceRecord>,
}

impl LearnTrace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    /// Objectives of the initial state and every accepted step.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        self.records.iter().filter(|r| r.accepted).map(|r| r.objective).collect()
    }

    /// Number of iterations after initialization.
    pub fn iterations(&self) -> usize {
        self.records.iter().map(|r| r.iteration).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "SCS")]
    Scs,
    #[serde(rename = "SCN")]
    Scn,
    #[serde(rename = "TLP")]
    Tlp,
    #[serde(rename = "BCD")]
    Bcd,
    #[serde(rename = "AM")]
    Am,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Scs, Algorithm::Scn, Algorithm::Tlp, Algorithm::Bcd, Algorithm::Am];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Scs => "SCS",
            Algorithm::Scn => "SCN",
            Algorithm::Tlp => "TLP",
            Algorithm::Bcd => "BCD",
            Algorithm::Am => "AM",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// Result of [`learn`].
#[derive(Debug, Clone, PartialEq)]
pub struct Learned {
    pub rule: TwoLevelRule,
    pub trace: LearnTrace,
    pub fractional: Option<FractionalSolution>,
}

/// Runs `algo` with `cfg`; SCS forces simple thresholding at 0.2 unless the
/// config sets its own threshold.
pub fn learn(ds: &BinaryDataset, algo: Algorithm, cfg: &LearnConfig) -> Result<Learned> {
    match algo {
        Algorithm::Scs => {
            let mut c = cfg.clone();
            c.simple_threshold = Some(cfg.simple_threshold.unwrap_or(SIMPLE_THRESHOLD));
            Ok(Learned {
                rule: learn_set_cover(ds, &c)?,
                trace: LearnTrace::default(),
                fractional: None,
            })
        }
        Algorithm::Scn => {
            let mut c = cfg.clone();
            c.simple_threshold = None;
            Ok(Learned {
                rule: learn_set_cover(ds, &c)?,
                trace: LearnTrace::default(),
                fractional: None,
            })
        }
        Algorithm::Tlp => {
            let (frac, rule) = learn_tlp(ds, cfg)?;
            Ok(Learned {
                rule,
                trace: LearnTrace::default(),
                fractional: Some(frac),
            })
        }
        Algorithm::Bcd => {
            let (rule, trace) = learn_bcd(ds, cfg)?;
            Ok(Learned {
                rule,
                trace,
                fractional: None,
            })
        }
        Algorithm::Am => {
            let (rule, trace) = learn_am(ds, cfg)?;
            Ok(Learned {
                rule,
                trace,
                fractional: None,
            })
        }
    }
}

/// Dataset and config on which to learn the CNF form of the requested rule.
///
/// For DNF this is the negated dataset, whose column `j` is the negation of
/// column `j` of `ds`, with column costs permuted to match.
pub(crate) fn cnf_view<'a>(ds: &'a BinaryDataset, cfg: &LearnConfig) -> Result<(Cow<'a, BinaryDataset>, LearnConfig)> {
    cfg.validate()?;
    if cfg.allow_disable && !ds.has_disable_column() {
        return Err(Error::InvalidArgument(
            "allow_disable needs a dataset with a disable column".into(),
        ));
    }
    let costs = cfg.costs_for(ds)?;
    match cfg.form {
        Form::Cnf => {
            let mut c = cfg.clone();
            c.column_costs = Some(costs);
            Ok((Cow::Borrowed(ds), c))
        }
        Form::Dnf => {
            let neg = ds.negated()?;
            let permuted = (0..ds.num_columns())
                .map(|j| costs.get(ds.negation_of(j).unwrap_or(j)))
                .collect();
            let mut c = cfg.clone();
            c.column_costs = Some(ColumnCosts(permuted));
            c.form = Form::Cnf;
            Ok((Cow::Owned(neg), c))
        }
    }
}
