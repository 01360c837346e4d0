//! Turning fractional LP weights into binary clauses.
//!
//! Thresholding is the baseline. The redundancy-aware sweep exploits the
//! structure of quantile columns: within one clause at most one column of a
//! nested chain is ever useful, and with the disable column present neither
//! is a complementary pair nor a pair along a zigzag path. Each clause is
//! processed one source feature at a time, heaviest first, choosing the best
//! admissible combination for that feature while the others stay put.

mod index;

use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::EPS_INT;
use crate::rule_model::{clause_maxes, clause_sums, Clause, ColumnCosts};

pub use index::{enumerate_candidates, RedundancyGroup, RedundancyIndex, Regime, Verify};

/// Threshold used by the baseline binarizer in the experiments.
pub const SIMPLE_THRESHOLD: f64 = 0.2;

/// Costs within this distance are ties.
const TIE_EPS: f64 = 1e-9;

/// Relaxed weights of an LP solve, `w[r][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub w: Vec<Vec<f64>>,
    pub objective_value: f64,
}

impl FractionalSolution {
    pub fn num_clauses(&self) -> usize {
        self.w.len()
    }

    pub fn is_binary(&self) -> bool {
        self.w.iter().flatten().all(|&x| x.abs() <= EPS_INT || (x - 1.0).abs() <= EPS_INT)
    }

    /// Rounds each entry to the nearest of 0 and 1.
    pub fn rounded(&self) -> Vec<Clause> {
        self.w
            .iter()
            .map(|wr| Clause::from_weights(wr.iter().map(|&x| x >= 0.5).collect()))
            .collect()
    }
}

/// `w := 1` iff the fractional value is at least `tau`.
pub fn simple_binarize(frac: &FractionalSolution, tau: f64) -> Result<Vec<Clause>> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("binarization threshold {tau} outside (0, 1)")));
    }
    Ok(frac
        .w
        .iter()
        .map(|wr| Clause::from_weights(wr.iter().map(|&x| x >= tau).collect()))
        .collect())
}

/// Training objective that scores candidate combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Relaxed 0-1 error, exact on binary weights.
    ZeroOne,
    /// Minimal Hamming distance.
    Hamming,
}

/// Stand-in value for weights not yet binarized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placeholder {
    /// The LP value itself.
    Fractional,
    /// 1 if the LP value is at least this threshold, else 0.
    Threshold(f64),
}

/// How source features are ordered within a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOrder {
    /// Fractional mass of the feature in the clause being processed.
    PerClause,
    /// Fractional mass summed over all clauses.
    AcrossClauses,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarizeOptions {
    pub objective: Objective,
    pub placeholder: Placeholder,
    pub order: GroupOrder,
    pub verify: Verify,
    /// Admissible combinations; taken from the dataset when absent.
    pub regime: Option<Regime>,
}

impl BinarizeOptions {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            placeholder: Placeholder::Fractional,
            order: GroupOrder::PerClause,
            verify: Verify::Fast,
            regime: None,
        }
    }
}

/// One committed choice of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarizeStep {
    pub clause: usize,
    pub group: usize,
    /// Weights of the whole rule right before this choice, `[r][j]`.
    pub point: Vec<Vec<f64>>,
    pub chosen: Vec<usize>,
    pub cost: f64,
}

/// Redundancy-aware binarization of `frac` against the training data `ds`.
pub fn redundancy_binarize(
    frac: &FractionalSolution,
    ds: &BinaryDataset,
    theta: f64,
    costs: &ColumnCosts,
    opts: BinarizeOptions,
) -> Result<Vec<Clause>> {
    run(frac, ds, theta, costs, opts, None)
}

/// [`redundancy_binarize`] that also returns every step with its
/// evaluation point.
pub fn redundancy_binarize_traced(
    frac: &FractionalSolution,
    ds: &BinaryDataset,
    theta: f64,
    costs: &ColumnCosts,
    opts: BinarizeOptions,
) -> Result<(Vec<Clause>, Vec<BinarizeStep>)> {
    let mut steps = Vec::new();
    let clauses = run(frac, ds, theta, costs, opts, Some(&mut steps))?;
    Ok((clauses, steps))
}

fn run(
    frac: &FractionalSolution,
    ds: &BinaryDataset,
    theta: f64,
    costs: &ColumnCosts,
    opts: BinarizeOptions,
    mut trace: Option<&mut Vec<BinarizeStep>>,
) -> Result<Vec<Clause>> {
    let d = ds.num_columns();
    if frac.w.is_empty() {
        return Err(Error::InvalidArgument("fractional solution has no clauses".into()));
    }
    if let Some(wr) = frac.w.iter().find(|wr| wr.len() != d) {
        return Err(Error::ArityMismatch {
            expected: d,
            actual: wr.len(),
        });
    }
    if costs.0.len() != d {
        return Err(Error::ArityMismatch {
            expected: d,
            actual: costs.0.len(),
        });
    }
    if frac.is_binary() {
        return Ok(frac.rounded());
    }
    let idx = RedundancyIndex::build(ds, opts.verify)?;
    let regime = opts.regime.unwrap_or_else(|| Regime::for_dataset(ds));
    let candidates: Vec<Vec<Vec<usize>>> = (0..idx.num_groups())
        .map(|g| enumerate_candidates(&idx, g, regime))
        .collect();

    let point: Vec<Vec<f64>> = match opts.placeholder {
        Placeholder::Fractional => frac.w.clone(),
        Placeholder::Threshold(t) => frac
            .w
            .iter()
            .map(|wr| wr.iter().map(|&x| if x >= t { 1.0 } else { 0.0 }).collect())
            .collect(),
    };
    let sums = clause_sums(ds, &point);
    let maxes = clause_maxes(ds, &point);
    let group_mass = |w: &[Vec<f64>], rs: &[usize], g: usize| -> f64 {
        rs.iter()
            .map(|&r| idx.groups[g].columns().map(|j| w[r][j]).sum::<f64>())
            .sum()
    };
    let all: Vec<usize> = (0..frac.w.len()).collect();

    let mut out = Vec::with_capacity(frac.w.len());
    for r in 0..frac.w.len() {
        let mut order: Vec<usize> = (0..idx.num_groups()).collect();
        let rs: &[usize] = match opts.order {
            GroupOrder::PerClause => std::slice::from_ref(&r),
            GroupOrder::AcrossClauses => &all,
        };
        let mass: Vec<f64> = order.iter().map(|&g| group_mass(&frac.w, rs, g)).collect();
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));

        let mut sweep = ClauseSweep {
            ds,
            r,
            objective: opts.objective,
            theta,
            costs,
            sums: &sums,
            maxes: &maxes,
            cur: point[r].clone(),
        };
        for &g in &order {
            let (chosen, cost) = sweep.choose(&idx.groups[g], &candidates[g]);
            if let Some(t) = trace.as_deref_mut() {
                let mut p = point.clone();
                p[r] = sweep.cur.clone();
                t.push(BinarizeStep {
                    clause: r,
                    group: g,
                    point: p,
                    chosen: chosen.clone(),
                    cost,
                });
            }
            for j in idx.groups[g].columns() {
                sweep.cur[j] = 0.0;
            }
            for &j in &chosen {
                sweep.cur[j] = 1.0;
            }
        }
        out.push(Clause::from_weights(sweep.cur.iter().map(|&x| x == 1.0).collect()));
    }
    Ok(out)
}

/// Evaluation state for one clause; other clauses stay at the evaluation point.
struct ClauseSweep<'a> {
    ds: &'a BinaryDataset,
    r: usize,
    objective: Objective,
    theta: f64,
    costs: &'a ColumnCosts,
    sums: &'a [Vec<f64>],
    maxes: &'a [Vec<f64>],
    cur: Vec<f64>,
}

impl ClauseSweep<'_> {
    /// Best candidate for `group` with the rest of the clause at `cur`.
    fn choose(&self, group: &RedundancyGroup, candidates: &[Vec<usize>]) -> (Vec<usize>, f64) {
        let n = self.ds.len();
        let in_group: Vec<bool> = {
            let mut v = vec![false; self.cur.len()];
            for j in group.columns() {
                v[j] = true;
            }
            v
        };
        let mut base_sum = vec![0.0; n];
        let mut base_max = vec![0.0f64; n];
        let mut base_sparsity = 0.0;
        for (j, &x) in self.cur.iter().enumerate() {
            if in_group[j] || x == 0.0 {
                continue;
            }
            base_sparsity += self.costs.get(j) * x;
            for (i, &a) in self.ds.column(j).iter().enumerate() {
                if a == 1 {
                    base_sum[i] += x;
                    if x > base_max[i] {
                        base_max[i] = x;
                    }
                }
            }
        }
        let mut costs = Vec::with_capacity(candidates.len());
        let mut cand_sum = vec![0.0; n];
        let mut cand_max = vec![0.0f64; n];
        for cand in candidates {
            cand_sum.iter_mut().for_each(|x| *x = 0.0);
            cand_max.iter_mut().for_each(|x| *x = 0.0);
            for &j in cand {
                for (i, &a) in self.ds.column(j).iter().enumerate() {
                    if a == 1 {
                        cand_sum[i] += 1.0;
                        cand_max[i] = 1.0;
                    }
                }
            }
            let acc = self.accuracy(&base_sum, &base_max, &cand_sum, &cand_max);
            let sparsity = base_sparsity + cand.iter().map(|&j| self.costs.get(j)).sum::<f64>();
            costs.push(acc + self.theta * sparsity);
        }
        let best = pick(candidates, &costs);
        (candidates[best].clone(), costs[best])
    }

    fn accuracy(&self, base_sum: &[f64], base_max: &[f64], cand_sum: &[f64], cand_max: &[f64]) -> f64 {
        let r_total = self.sums.len();
        let mut acc = 0.0;
        for i in 0..self.ds.len() {
            let s_own = base_sum[i] + cand_sum[i];
            let label = self.ds.label(i);
            acc += match self.objective {
                Objective::Hamming => {
                    if label {
                        (0..r_total)
                            .map(|q| {
                                let s = if q == self.r { s_own } else { self.sums[q][i] };
                                (1.0 - s).max(0.0)
                            })
                            .sum()
                    } else {
                        (0..r_total)
                            .map(|q| if q == self.r { s_own } else { self.sums[q][i] })
                            .fold(f64::INFINITY, f64::min)
                    }
                }
                Objective::ZeroOne => {
                    if label {
                        (0..r_total)
                            .map(|q| 1.0 - if q == self.r { s_own } else { self.sums[q][i] })
                            .fold(0.0, f64::max)
                    } else {
                        let m_own = base_max[i].max(cand_max[i]);
                        let total: f64 = (0..r_total)
                            .map(|q| if q == self.r { m_own } else { self.maxes[q][i] })
                            .sum();
                        (total - (r_total as f64 - 1.0)).max(0.0)
                    }
                }
            };
        }
        acc
    }
}

/// Index of the cheapest candidate; near-ties go to the sparser candidate,
/// then to the lexicographically smaller column set.
pub fn pick(candidates: &[Vec<usize>], costs: &[f64]) -> usize {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    (0..candidates.len())
        .filter(|&k| costs[k] <= min + TIE_EPS)
        .min_by(|&a, &b| {
            candidates[a]
                .len()
                .cmp(&candidates[b].len())
                .then_with(|| candidates[a].cmp(&candidates[b]))
        })
        .expect("at least the empty candidate")
}
