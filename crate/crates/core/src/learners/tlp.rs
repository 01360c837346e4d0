use std::collections::HashSet;

use super::{cnf_view, LearnConfig};
use crate::binarization::{redundancy_binarize, FractionalSolution, Objective};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation, EPS_FEAS};
use crate::rule_model::{ColumnCosts, Form, TwoLevelRule};

/// The two-level relaxation of the 0-1 error program.
///
/// Variables: `w[r][j]` in `[0, 1]`, one error `psi_i` in `[0, 1]` per sample,
/// and `beta[i][r]` in `[0, 1]` per negative sample and clause. Rows:
///
/// ```text
/// psi_i + sum_j a_ij w_jr >= 1                 positive i, every r
/// psi_i - sum_r beta_ir   >= 1 - R             negative i
/// beta_ir - w_jr          >= 0                 negative i, every r, a_ij = 1
/// ```
///
/// The last family is large (negatives x R x active features), so it can be
/// left out and added on demand with [`TlpProgram::add_beta_row`].
#[derive(Debug, Clone)]
pub struct TlpProgram {
    pub lp: LinearProgram,
    /// LP variable of `w[r][j]`; `None` for weights fixed at 0.
    pub w: Vec<Vec<Option<usize>>>,
    pub psi: Vec<usize>,
    /// LP variable of `beta[i][r]`, for negative samples only.
    pub beta: Vec<Option<Vec<usize>>>,
}

impl TlpProgram {
    pub fn add_beta_row(&mut self, i: usize, r: usize, j: usize) {
        let (Some(b), Some(w)) = (&self.beta[i], self.w[r][j]) else {
            return;
        };
        self.lp.add_constraint(vec![(b[r], 1.0), (w, -1.0)], Relation::Ge, 0.0);
    }

    /// Weights `[r][j]` of an LP point.
    pub fn weights(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.w
            .iter()
            .map(|wr| wr.iter().map(|v| v.map_or(0.0, |k| x[k].clamp(0.0, 1.0))).collect())
            .collect()
    }
}

/// Builds the relaxation on `ds` read as a CNF problem, with all rows when
/// `all_beta_rows` is set and without the `beta >= w` family otherwise.
pub fn tlp_program(ds: &BinaryDataset, theta: f64, r_total: usize, costs: &ColumnCosts, caps: &[f64], all_beta_rows: bool) -> TlpProgram {
    let d = ds.num_columns();
    let mut lp = LinearProgram::new();
    let positives: Vec<usize> = (0..ds.len()).filter(|&i| ds.label(i)).collect();
    // A weight that no positive benefits from only tightens beta rows.
    let useful: Vec<bool> = (0..d)
        .map(|j| caps[j] > 0.0 && positives.iter().any(|&i| ds.get(i, j)))
        .collect();
    let w: Vec<Vec<Option<usize>>> = (0..r_total)
        .map(|_| {
            (0..d)
                .map(|j| useful[j].then(|| lp.add_var(0.0, caps[j], theta * costs.get(j))))
                .collect()
        })
        .collect();
    let psi: Vec<usize> = (0..ds.len()).map(|_| lp.add_var(0.0, 1.0, 1.0)).collect();
    let beta: Vec<Option<Vec<usize>>> = (0..ds.len())
        .map(|i| (!ds.label(i)).then(|| (0..r_total).map(|_| lp.add_var(0.0, 1.0, 0.0)).collect()))
        .collect();

    for &i in &positives {
        let row = ds.row(i);
        for wr in &w {
            let mut coeffs: Vec<(usize, f64)> = (0..d)
                .filter(|&j| row[j] == 1)
                .filter_map(|j| wr[j].map(|v| (v, 1.0)))
                .collect();
            coeffs.push((psi[i], 1.0));
            lp.add_constraint(coeffs, Relation::Ge, 1.0);
        }
    }
    for (i, b) in beta.iter().enumerate() {
        if let Some(b) = b {
            let mut coeffs = vec![(psi[i], 1.0)];
            coeffs.extend(b.iter().map(|&k| (k, -1.0)));
            lp.add_constraint(coeffs, Relation::Ge, 1.0 - r_total as f64);
        }
    }
    let mut prog = TlpProgram { lp, w, psi, beta };
    if all_beta_rows {
        for i in 0..ds.len() {
            if ds.label(i) {
                continue;
            }
            for r in 0..r_total {
                for j in 0..d {
                    if ds.get(i, j) {
                        prog.add_beta_row(i, r, j);
                    }
                }
            }
        }
    }
    prog
}

/// Two-level LP relaxation followed by redundancy-aware rounding under the
/// 0-1 objective.
///
/// The `beta >= w` rows are generated lazily: solve, add every violated row,
/// and repeat until none is violated, which yields the optimum of the full
/// relaxation.
pub fn learn_tlp(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<(FractionalSolution, TwoLevelRule)> {
    let (view, c) = cnf_view(ds, cfg)?;
    let costs = c.costs_for(&view)?;
    let caps = c.weight_caps(&view);
    let frac = solve_relaxation(&view, &c, &costs, &caps)?;
    let clauses = redundancy_binarize(&frac, &view, c.theta, &costs, c.binarize_options(Objective::ZeroOne))?;
    let rule = TwoLevelRule::new(clauses, Form::Cnf)?.with_form(cfg.form);
    Ok((frac, rule))
}

fn solve_relaxation(ds: &BinaryDataset, cfg: &LearnConfig, costs: &ColumnCosts, caps: &[f64]) -> Result<FractionalSolution> {
    let r_total = cfg.r;
    let mut prog = tlp_program(ds, cfg.theta, r_total, costs, caps, false);
    let mut added: HashSet<(usize, usize, usize)> = HashSet::new();
    let d = ds.num_columns();
    loop {
        let sol = lp::solve(&prog.lp, cfg.limits())?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpNotOptimal(sol.status));
        }
        let mut new_rows = 0;
        for i in 0..ds.len() {
            let Some(b) = prog.beta[i].clone() else {
                continue;
            };
            let row = ds.row(i);
            for r in 0..r_total {
                let beta = sol.x[b[r]];
                for j in 0..d {
                    if row[j] == 0 {
                        continue;
                    }
                    let Some(v) = prog.w[r][j] else {
                        continue;
                    };
                    if sol.x[v] - beta > EPS_FEAS && added.insert((i, r, j)) {
                        prog.add_beta_row(i, r, j);
                        new_rows += 1;
                    }
                }
            }
        }
        if new_rows == 0 {
            return Ok(FractionalSolution {
                w: prog.weights(&sol.x),
                objective_value: sol.objective_value,
            });
        }
        log::debug!("tlp: added {new_rows} rows, {} total", prog.lp.num_constraints());
    }
}
