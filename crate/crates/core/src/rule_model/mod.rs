//! Two-level rules, their predictions, and the costs that learners minimize.
//!
//! A CNF rule predicts `AND_r OR_{j in C_r} a_j`; a DNF rule predicts
//! `OR_r AND_{j in C_r} a_j`. An empty CNF clause outputs 0 and an empty DNF
//! clause outputs 1. Selecting the disable column turns a CNF clause into the
//! constant 1 and a DNF clause into the constant 0, so De Morgan duality maps
//! disabled clauses onto disabled clauses.

mod document;

use serde::{Deserialize, Serialize};

use crate::data::{negation_map, BinaryDataset, FeatureMeta};
use crate::error::{Error, Result};

pub use document::{ClauseDocument, Literal, LiteralOp, RuleDocument, RULE_FORMAT, RULE_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    #[serde(rename = "CNF")]
    Cnf,
    #[serde(rename = "DNF")]
    Dnf,
}

impl Form {
    pub fn dual(self) -> Self {
        match self {
            Form::Cnf => Form::Dnf,
            Form::Dnf => Form::Cnf,
        }
    }
}

/// Binary selection vector of one clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    w: Vec<bool>,
}

impl Clause {
    pub fn empty(d: usize) -> Self {
        Self { w: vec![false; d] }
    }

    pub fn from_weights(w: Vec<bool>) -> Self {
        Self { w }
    }

    pub fn from_selected(d: usize, selected: &[usize]) -> Self {
        let mut w = vec![false; d];
        for &j in selected {
            w[j] = true;
        }
        Self { w }
    }

    pub fn arity(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[bool] {
        &self.w
    }

    pub fn is_selected(&self, j: usize) -> bool {
        self.w[j]
    }

    pub fn set(&mut self, j: usize, on: bool) {
        self.w[j] = on;
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.w.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j)
    }

    pub fn feature_count(&self) -> usize {
        self.w.iter().filter(|&&b| b).count()
    }

    /// `sum_j a_ij w_j` for every sample.
    pub fn sums(&self, ds: &BinaryDataset) -> Vec<u32> {
        let mut s = vec![0u32; ds.len()];
        for j in self.selected() {
            for (acc, &a) in s.iter_mut().zip(ds.column(j)) {
                *acc += a as u32;
            }
        }
        s
    }

    pub fn as_fractional(&self) -> Vec<f64> {
        self.w.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

/// `R` clauses combined in CNF or DNF.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwoLevelRule {
    clauses: Vec<Clause>,
    form: Form,
    d: usize,
}

impl TwoLevelRule {
    pub fn new(clauses: Vec<Clause>, form: Form) -> Result<Self> {
        let Some(first) = clauses.first() else {
            return Err(Error::InvalidArgument("a rule needs at least one clause".into()));
        };
        let d = first.arity();
        if let Some(c) = clauses.iter().find(|c| c.arity() != d) {
            return Err(Error::ArityMismatch {
                expected: d,
                actual: c.arity(),
            });
        }
        Ok(Self { clauses, form, d })
    }

    pub fn empty(r: usize, d: usize, form: Form) -> Self {
        Self {
            clauses: vec![Clause::empty(d); r.max(1)],
            form,
            d,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, r: usize) -> &Clause {
        &self.clauses[r]
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn replace_clause(&mut self, r: usize, clause: Clause) {
        assert_eq!(clause.arity(), self.d, "clause arity");
        self.clauses[r] = clause;
    }

    /// Selected weights summed over clauses, disable column excluded.
    pub fn feature_count(&self, ds: &BinaryDataset) -> usize {
        let skip = ds.disable_column();
        self.clauses
            .iter()
            .map(|c| c.selected().filter(|&j| Some(j) != skip).count())
            .sum()
    }

    pub fn weight_matrix(&self) -> Vec<Vec<f64>> {
        self.clauses.iter().map(Clause::as_fractional).collect()
    }

    fn check_arity(&self, ds: &BinaryDataset) -> Result<()> {
        if ds.num_columns() != self.d {
            return Err(Error::ArityMismatch {
                expected: self.d,
                actual: ds.num_columns(),
            });
        }
        Ok(())
    }
}

/// Per-column sparsity weights. Defaults to 1 for features and 0 for the
/// disable column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnCosts(pub Vec<f64>);

impl ColumnCosts {
    pub fn for_dataset(ds: &BinaryDataset) -> Self {
        Self::with_disable_cost(ds, 0.0)
    }

    pub fn with_disable_cost(ds: &BinaryDataset, disable_cost: f64) -> Self {
        Self(
            ds.columns()
                .iter()
                .map(|m| if m.is_disable { disable_cost } else { 1.0 })
                .collect(),
        )
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0; d])
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    /// `sum_r sum_j cost_j w_jr`.
    pub fn weighted_count(&self, w: &[Vec<f64>]) -> f64 {
        w.iter()
            .map(|c| c.iter().zip(&self.0).map(|(x, k)| x * k).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub accuracy_cost: f64,
    pub sparsity_cost: f64,
    pub total: f64,
}

impl CostReport {
    pub fn new(accuracy_cost: f64, sparsity_cost: f64) -> Self {
        Self {
            accuracy_cost,
            sparsity_cost,
            total: accuracy_cost + sparsity_cost,
        }
    }
}

/// Ternary ideal clause output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ideal {
    Zero,
    One,
    DontCare,
}

/// `n x R` matrix of ideal clause outputs, consistent with the labels:
/// positives are 1 everywhere, negatives have at least one 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealOutputs {
    r: usize,
    v: Vec<Ideal>,
}

impl IdealOutputs {
    pub fn new(rows: Vec<Vec<Ideal>>, labels: &[bool]) -> Result<Self> {
        let r = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::ArityMismatch {
                expected: labels.len(),
                actual: rows.len(),
            });
        }
        let mut v = Vec::with_capacity(rows.len() * r);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::ArityMismatch {
                    expected: r,
                    actual: row.len(),
                });
            }
            let ok = if labels[i] {
                row.iter().all(|&x| x == Ideal::One)
            } else {
                row.contains(&Ideal::Zero)
            };
            if !ok {
                return Err(Error::InconsistentIdealOutputs { sample: i });
            }
            v.extend_from_slice(row);
        }
        Ok(Self { r, v })
    }

    pub fn num_clauses(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.v.len().checked_div(self.r).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn get(&self, i: usize, r: usize) -> Ideal {
        self.v[i * self.r + r]
    }

    pub fn row(&self, i: usize) -> &[Ideal] {
        &self.v[i * self.r..(i + 1) * self.r]
    }
}

/// Disjunctive clause output `OR_j a_ij w_j`.
pub fn eval_clause(ds: &BinaryDataset, clause: &Clause, i: usize) -> Result<bool> {
    if clause.arity() != ds.num_columns() {
        return Err(Error::ArityMismatch {
            expected: clause.arity(),
            actual: ds.num_columns(),
        });
    }
    let row = ds.row(i);
    Ok(clause.selected().any(|j| row[j] == 1))
}

/// Conjunctive clause output `AND_j a_ij` over the selection; constant 0 when
/// the disable column is selected.
pub fn eval_term(ds: &BinaryDataset, clause: &Clause, i: usize) -> Result<bool> {
    if clause.arity() != ds.num_columns() {
        return Err(Error::ArityMismatch {
            expected: clause.arity(),
            actual: ds.num_columns(),
        });
    }
    if ds.disable_column().is_some_and(|k| clause.is_selected(k)) {
        return Ok(false);
    }
    let row = ds.row(i);
    Ok(clause.selected().all(|j| row[j] == 1))
}

pub fn predict(ds: &BinaryDataset, rule: &TwoLevelRule, i: usize) -> Result<bool> {
    rule.check_arity(ds)?;
    Ok(match rule.form {
        Form::Cnf => rule.clauses.iter().all(|c| eval_clause(ds, c, i).expect("arity checked")),
        Form::Dnf => rule.clauses.iter().any(|c| eval_term(ds, c, i).expect("arity checked")),
    })
}

/// Predictions for every sample, computed column-wise.
pub fn predict_all(ds: &BinaryDataset, rule: &TwoLevelRule) -> Result<Vec<bool>> {
    rule.check_arity(ds)?;
    let n = ds.len();
    match rule.form {
        Form::Cnf => {
            let mut out = vec![true; n];
            for c in &rule.clauses {
                for (o, s) in out.iter_mut().zip(c.sums(ds)) {
                    *o &= s > 0;
                }
            }
            Ok(out)
        }
        Form::Dnf => {
            let mut out = vec![false; n];
            let disable = ds.disable_column();
            for c in &rule.clauses {
                if disable.is_some_and(|k| c.is_selected(k)) {
                    continue;
                }
                let need = c.feature_count() as u32;
                for (o, s) in out.iter_mut().zip(c.sums(ds)) {
                    *o |= s == need;
                }
            }
            Ok(out)
        }
    }
}

/// Dual rule: form flipped and every selected column replaced by its
/// negation (the disable column maps to itself). The dual predicts the
/// complement of the original on every input, and applying it twice gives
/// back the original rule.
pub fn de_morgan(rule: &TwoLevelRule, columns: &[FeatureMeta]) -> Result<TwoLevelRule> {
    if columns.len() != rule.d {
        return Err(Error::ArityMismatch {
            expected: rule.d,
            actual: columns.len(),
        });
    }
    let neg = negation_map(columns)?;
    let mut clauses = Vec::with_capacity(rule.clauses.len());
    for c in &rule.clauses {
        let mut out = Clause::empty(rule.d);
        for j in c.selected() {
            let k = if columns[j].is_disable {
                j
            } else {
                neg[j].ok_or(Error::MissingNegation { column: j })?
            };
            out.set(k, true);
        }
        clauses.push(out);
    }
    Ok(TwoLevelRule {
        clauses,
        form: rule.form.dual(),
        d: rule.d,
    })
}

fn sparsity(rule: &TwoLevelRule, theta: f64, costs: &ColumnCosts) -> f64 {
    theta
        * rule
            .clauses
            .iter()
            .map(|c| c.selected().map(|j| costs.get(j)).sum::<f64>())
            .sum::<f64>()
}

/// Misclassification count plus weighted sparsity.
pub fn zero_one_cost(ds: &BinaryDataset, rule: &TwoLevelRule, theta: f64, costs: &ColumnCosts) -> Result<CostReport> {
    let pred = predict_all(ds, rule)?;
    let errors = pred.iter().zip(ds.labels()).filter(|(p, y)| p != y).count();
    Ok(CostReport::new(errors as f64, sparsity(rule, theta, costs)))
}

/// `s_ir = sum_j a_ij w_jr` for fractional weights; indexed `[r][i]`.
pub fn clause_sums(ds: &BinaryDataset, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    w.iter()
        .map(|wr| {
            let mut s = vec![0.0; ds.len()];
            for (j, &x) in wr.iter().enumerate() {
                if x != 0.0 {
                    for (acc, &a) in s.iter_mut().zip(ds.column(j)) {
                        if a == 1 {
                            *acc += x;
                        }
                    }
                }
            }
            s
        })
        .collect()
}

/// Minimal-Hamming-distance accuracy cost of sample `i` given its clause
/// sums across the `R` clauses.
#[inline]
pub fn hamming_term(label: bool, sums: impl Iterator<Item = f64>) -> f64 {
    if label {
        sums.map(|s| (1.0 - s).max(0.0)).sum()
    } else {
        sums.fold(f64::INFINITY, f64::min)
    }
}

/// Hamming-distance cost for CNF weights, fractional entries allowed.
pub fn hamming_cost_weights(ds: &BinaryDataset, w: &[Vec<f64>], theta: f64, costs: &ColumnCosts) -> CostReport {
    let sums = clause_sums(ds, w);
    let acc: f64 = (0..ds.len())
        .map(|i| hamming_term(ds.label(i), sums.iter().map(|s| s[i])))
        .sum();
    CostReport::new(acc, theta * costs.weighted_count(w))
}

/// Hamming-distance cost of a CNF rule.
pub fn hamming_cost(ds: &BinaryDataset, rule: &TwoLevelRule, theta: f64, costs: &ColumnCosts) -> Result<CostReport> {
    if rule.form != Form::Cnf {
        return Err(Error::FormMismatch("hamming cost is defined for CNF rules".into()));
    }
    rule.check_arity(ds)?;
    Ok(hamming_cost_weights(ds, &rule.weight_matrix(), theta, costs))
}

/// Per-sample Hamming distances `eta_i` of a CNF rule.
pub fn hamming_distances(ds: &BinaryDataset, rule: &TwoLevelRule) -> Result<Vec<f64>> {
    if rule.form != Form::Cnf {
        return Err(Error::FormMismatch("hamming cost is defined for CNF rules".into()));
    }
    rule.check_arity(ds)?;
    let sums = clause_sums(ds, &rule.weight_matrix());
    Ok((0..ds.len())
        .map(|i| hamming_term(ds.label(i), sums.iter().map(|s| s[i])))
        .collect())
}

/// Relaxed 0-1 cost of CNF weights: each sample's error is the smallest
/// `psi_i` feasible in the two-level LP at these weights. Agrees with the
/// 0-1 error on binary weights.
pub fn relaxed_zero_one_cost_weights(
    ds: &BinaryDataset,
    w: &[Vec<f64>],
    theta: f64,
    costs: &ColumnCosts,
) -> CostReport {
    let r = w.len() as f64;
    let sums = clause_sums(ds, w);
    let maxes = clause_maxes(ds, w);
    let acc: f64 = (0..ds.len())
        .map(|i| {
            if ds.label(i) {
                sums.iter().map(|s| 1.0 - s[i]).fold(0.0, f64::max)
            } else {
                (maxes.iter().map(|m| m[i]).sum::<f64>() - (r - 1.0)).max(0.0)
            }
        })
        .sum();
    CostReport::new(acc, theta * costs.weighted_count(w))
}

/// `max_j a_ij w_jr`; indexed `[r][i]`.
pub fn clause_maxes(ds: &BinaryDataset, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    w.iter()
        .map(|wr| {
            let mut m = vec![0.0f64; ds.len()];
            for (j, &x) in wr.iter().enumerate() {
                if x > 0.0 {
                    for (acc, &a) in m.iter_mut().zip(ds.column(j)) {
                        if a == 1 && x > *acc {
                            *acc = x;
                        }
                    }
                }
            }
            m
        })
        .collect()
}

/// Joint cost over weights and ideal outputs.
pub fn joint_cost(
    ds: &BinaryDataset,
    rule: &TwoLevelRule,
    v: &IdealOutputs,
    theta: f64,
    costs: &ColumnCosts,
) -> Result<CostReport> {
    if rule.form != Form::Cnf {
        return Err(Error::FormMismatch("joint cost is defined for CNF rules".into()));
    }
    rule.check_arity(ds)?;
    if v.len() != ds.len() || v.num_clauses() != rule.num_clauses() {
        return Err(Error::ArityMismatch {
            expected: ds.len() * rule.num_clauses(),
            actual: v.len() * v.num_clauses(),
        });
    }
    for i in 0..ds.len() {
        let row = v.row(i);
        let ok = if ds.label(i) {
            row.iter().all(|&x| x == Ideal::One)
        } else {
            row.contains(&Ideal::Zero)
        };
        if !ok {
            return Err(Error::InconsistentIdealOutputs { sample: i });
        }
    }
    let sums: Vec<Vec<u32>> = rule.clauses.iter().map(|c| c.sums(ds)).collect();
    let mut acc = 0.0;
    for i in 0..ds.len() {
        for (r, s) in sums.iter().enumerate() {
            acc += match v.get(i, r) {
                Ideal::One => (1.0 - s[i] as f64).max(0.0),
                Ideal::Zero => s[i] as f64,
                Ideal::DontCare => 0.0,
            };
        }
    }
    Ok(CostReport::new(acc, sparsity(rule, theta, costs)))
}

/// Fraction of misclassified samples.
pub fn error_rate(ds: &BinaryDataset, rule: &TwoLevelRule) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pred = predict_all(ds, rule)?;
    let errors = pred.iter().zip(ds.labels()).filter(|(p, y)| p != y).count();
    Ok(errors as f64 / ds.len() as f64)
}
