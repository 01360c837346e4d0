use crate::binarization::{redundancy_binarize, simple_binarize, BinarizeOptions, FractionalSolution, Objective};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation, SolveLimits};
use crate::rule_model::{Clause, ColumnCosts};

/// How the one-level LP solution becomes a clause.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClauseBinarizer {
    Simple(f64),
    Redundancy(BinarizeOptions),
}

impl Default for ClauseBinarizer {
    fn default() -> Self {
        ClauseBinarizer::Redundancy(BinarizeOptions::new(Objective::Hamming))
    }
}

/// Learns one disjunctive clause on the samples in `subset`.
///
/// Minimizes `sum_i xi_i + theta * sum_j cost_j w_j` over `w` in `[0,1]^d`,
/// where `xi_i = max(0, 1 - a_i.w)` for positives and `xi_i = a_i.w` for
/// negatives. Only positives get a slack variable; the negative terms are
/// folded into the weight costs.
pub fn learn_one_level(
    ds: &BinaryDataset,
    subset: &[usize],
    theta: f64,
    costs: &ColumnCosts,
    binarizer: ClauseBinarizer,
) -> Result<(FractionalSolution, Clause)> {
    let sub = ds.subset(subset, None);
    let caps = vec![1.0; ds.num_columns()];
    one_level(&sub, theta, costs, &caps, binarizer, SolveLimits::default())
}

/// The one-level LP on every sample of `ds`, with per-column weight caps.
pub(crate) fn one_level(
    ds: &BinaryDataset,
    theta: f64,
    costs: &ColumnCosts,
    caps: &[f64],
    binarizer: ClauseBinarizer,
    limits: SolveLimits,
) -> Result<(FractionalSolution, Clause)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = ds.num_columns();
    if costs.0.len() != d {
        return Err(Error::ArityMismatch {
            expected: d,
            actual: costs.0.len(),
        });
    }
    let frac = one_level_lp(ds, theta, costs, caps, limits)?;
    let clause = match binarizer {
        ClauseBinarizer::Simple(tau) => simple_binarize(&frac, tau)?.remove(0),
        ClauseBinarizer::Redundancy(opts) => redundancy_binarize(&frac, ds, theta, costs, opts)?.remove(0),
    };
    Ok((frac, clause))
}

/// Relaxed solution of the one-level program.
pub(crate) fn one_level_lp(
    ds: &BinaryDataset,
    theta: f64,
    costs: &ColumnCosts,
    caps: &[f64],
    limits: SolveLimits,
) -> Result<FractionalSolution> {
    let d = ds.num_columns();
    let positives: Vec<usize> = (0..ds.len()).filter(|&i| ds.label(i)).collect();
    let mut lp = LinearProgram::new();
    // A column that no positive sample has can only add cost, so it stays 0.
    let mut var_of = vec![None; d];
    for j in 0..d {
        let col = ds.column(j);
        if caps[j] <= 0.0 || !positives.iter().any(|&i| col[i] == 1) {
            continue;
        }
        let negatives = (0..ds.len()).filter(|&i| !ds.label(i) && col[i] == 1).count();
        var_of[j] = Some(lp.add_var(0.0, caps[j], theta * costs.get(j) + negatives as f64));
    }
    for &i in &positives {
        let xi = lp.add_var(0.0, 1.0, 1.0);
        let row = ds.row(i);
        let mut coeffs: Vec<(usize, f64)> = (0..d)
            .filter(|&j| row[j] == 1)
            .filter_map(|j| var_of[j].map(|v| (v, 1.0)))
            .collect();
        coeffs.push((xi, 1.0));
        lp.add_constraint(coeffs, Relation::Ge, 1.0);
    }
    let sol = lp::solve(&lp, limits)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpNotOptimal(sol.status));
    }
    let w = (0..d)
        .map(|j| var_of[j].map_or(0.0, |v| sol.x[v].clamp(0.0, 1.0)))
        .collect();
    Ok(FractionalSolution {
        w: vec![w],
        objective_value: sol.objective_value,
    })
}
