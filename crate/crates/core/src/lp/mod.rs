//! Box-bounded linear programs and a built-in bounded-variable revised simplex.
//!
//! Every LP in this crate has the shape
//!
//! ```text
//! minimize    c·x
//! subject to  rows: a·x {>=, <=, =} b
//!             lo <= x <= hi   (finite)
//! ```
//!
//! Bounds are handled structurally by the solver, never as extra rows.

mod export;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::write_mps;
pub use simplex::RevisedSimplex;

/// Primal feasibility tolerance.
pub const EPS_FEAS: f64 = 1e-7;
/// Objective tolerance used when comparing optimal values.
pub const EPS_OBJ: f64 = 1e-6;
/// Integrality tolerance.
pub const EPS_INT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable {0}: lower bound exceeds upper bound")]
    BadBounds(usize),
    #[error("variable {0}: bounds must be finite")]
    InfiniteBound(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("constraint {row} references unknown variable {var}")]
    UnknownVariable { row: usize, var: usize },
    #[error("basis matrix became singular")]
    Singular,
    #[error("objective is unbounded below")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with bounds `[lo, hi]` and objective coefficient `cost`,
    /// returning its index.
    pub fn add_var(&mut self, lo: f64, hi: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        for c in &self.constraints {
            let act: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Ge => c.rhs - act,
                Relation::Le => act - c.rhs,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(LpError::InfiniteBound(j));
            }
            if lo > hi {
                return Err(LpError::BadBounds(j));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        let n = self.num_vars();
        for (row, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite("right-hand side"));
            }
            for &(var, a) in &c.coeffs {
                if var >= n {
                    return Err(LpError::UnknownVariable { row, var });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite("constraint row"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_iters: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { max_iters: 200_000 }
    }
}

/// Anything able to solve a [`LinearProgram`] under the crate's LP contract.
pub trait LpBackend: Send + Sync {
    fn solve(&self, lp: &LinearProgram, limits: SolveLimits) -> Result<LpSolution, LpError>;
}

/// Solves with the built-in revised simplex.
pub fn solve(lp: &LinearProgram, limits: SolveLimits) -> Result<LpSolution, LpError> {
    RevisedSimplex::default().solve(lp, limits)
}

/// Flags which entries of `x` are within `eps` of 0 or 1.
pub fn is_integral(x: &[f64], eps: f64) -> Vec<bool> {
    x.iter().map(|&v| v.abs().min((v - 1.0).abs()) <= eps).collect()
}
