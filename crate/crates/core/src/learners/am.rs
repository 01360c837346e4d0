use super::one_level::one_level;
use super::set_cover::{clause_binarizer, set_cover_cnf};
use super::{cnf_view, LearnConfig, LearnTrace, Phase, TraceRecord};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rule_model::{hamming_cost, Form, Ideal, IdealOutputs, TwoLevelRule};

/// Ideal clause outputs closest to the current CNF rule.
///
/// Positives get 1 everywhere. A negative gets 0 at the clause with the
/// smallest sum and don't-care elsewhere; when several clauses share that
/// sum, it goes to the one whose cluster center is nearest in l1 distance.
/// The center of clause `r` is the mean row over negatives for which `r`
/// attains the minimum, ties included. Remaining ties go to the lowest index.
pub fn am_update_v(ds: &BinaryDataset, rule: &TwoLevelRule) -> Result<IdealOutputs> {
    if rule.form() != Form::Cnf {
        return Err(Error::FormMismatch("ideal outputs are defined for CNF rules".into()));
    }
    if rule.arity() != ds.num_columns() {
        return Err(Error::ArityMismatch {
            expected: rule.arity(),
            actual: ds.num_columns(),
        });
    }
    let r_total = rule.num_clauses();
    let d = ds.num_columns();
    let sums: Vec<Vec<u32>> = rule.clauses().iter().map(|c| c.sums(ds)).collect();
    let minimal: Vec<Vec<usize>> = (0..ds.len())
        .map(|i| {
            if ds.label(i) {
                return Vec::new();
            }
            let m = (0..r_total).map(|r| sums[r][i]).min().unwrap_or(0);
            (0..r_total).filter(|&r| sums[r][i] == m).collect()
        })
        .collect();

    let needs_centers = minimal.iter().any(|m| m.len() > 1);
    let mut centers = vec![vec![0.0; d]; r_total];
    if needs_centers {
        let mut counts = vec![0usize; r_total];
        for (i, m) in minimal.iter().enumerate() {
            for &r in m {
                counts[r] += 1;
                for (c, &a) in centers[r].iter_mut().zip(ds.row(i)) {
                    *c += a as f64;
                }
            }
        }
        for (c, &k) in centers.iter_mut().zip(&counts) {
            if k > 0 {
                c.iter_mut().for_each(|x| *x /= k as f64);
            }
        }
    }

    let rows = (0..ds.len())
        .map(|i| {
            if ds.label(i) {
                return vec![Ideal::One; r_total];
            }
            let m = &minimal[i];
            let r0 = if m.len() == 1 {
                m[0]
            } else {
                let row = ds.row(i);
                let dist = |r: usize| -> f64 { centers[r].iter().zip(row).map(|(c, &a)| (c - a as f64).abs()).sum() };
                let mut best = m[0];
                let mut best_dist = dist(best);
                for &r in &m[1..] {
                    let dr = dist(r);
                    if dr < best_dist {
                        best = r;
                        best_dist = dr;
                    }
                }
                best
            };
            let mut v = vec![Ideal::DontCare; r_total];
            v[r0] = Ideal::Zero;
            v
        })
        .collect();
    IdealOutputs::new(rows, ds.labels())
}

/// Alternating minimization between ideal outputs and clause weights,
/// starting from set cover.
///
/// Each round updates the ideal outputs, then re-learns every clause on the
/// samples it is not indifferent to, relabeled by their ideal output. The
/// round's score is the joint cost at the new weights with freshly updated
/// ideal outputs, which equals the minimal-Hamming cost. The first round
/// that fails to lower it ends the search.
pub fn learn_am(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<(TwoLevelRule, LearnTrace)> {
    let (view, mut c) = cnf_view(ds, cfg)?;
    c.simple_threshold = None;
    let (rule, trace) = am_cnf(&view, &c)?;
    Ok((rule.with_form(cfg.form), trace))
}

fn am_cnf(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<(TwoLevelRule, LearnTrace)> {
    let costs = cfg.costs_for(ds)?;
    let caps = cfg.weight_caps(ds);
    let binarizer = clause_binarizer(cfg);
    let mut rule = set_cover_cnf(ds, cfg)?;
    let mut current = hamming_cost(ds, &rule, cfg.theta, &costs)?.total;
    let mut trace = LearnTrace::default();
    trace.push(TraceRecord {
        iteration: 0,
        objective: current,
        phase: Phase::Init,
        clause: None,
        accepted: true,
    });

    for it in 1..=cfg.max_iters {
        let v = am_update_v(ds, &rule)?;
        let mut next = rule.clone();
        for r in 0..rule.num_clauses() {
            let samples: Vec<usize> = (0..ds.len()).filter(|&i| v.get(i, r) != Ideal::DontCare).collect();
            if samples.is_empty() {
                continue;
            }
            let labels: Vec<bool> = samples.iter().map(|&i| v.get(i, r) == Ideal::One).collect();
            let sub = ds.subset(&samples, Some(&labels));
            let (_, clause) = one_level(&sub, cfg.theta, &costs, &caps, binarizer, cfg.limits())?;
            next.replace_clause(r, clause);
        }
        let cost = hamming_cost(ds, &next, cfg.theta, &costs)?.total;
        let improved = cost < current;
        trace.push(TraceRecord {
            iteration: it,
            objective: cost,
            phase: Phase::Alternation,
            clause: None,
            accepted: improved,
        });
        if !improved {
            break;
        }
        rule = next;
        current = cost;
    }
    Ok((rule, trace))
}
