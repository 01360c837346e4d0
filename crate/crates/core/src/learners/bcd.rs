use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::one_level::one_level;
use super::set_cover::{clause_binarizer, set_cover_cnf};
use super::{cnf_view, LearnConfig, LearnTrace, Phase, TraceRecord, UpdateOrder};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rule_model::{hamming_cost, Form, TwoLevelRule};

/// Samples that matter when clause `r0` is re-learned: every positive, and
/// every negative that all other clauses still output 1 on.
pub fn bcd_filter_samples(ds: &BinaryDataset, rule: &TwoLevelRule, r0: usize) -> Result<Vec<usize>> {
    if r0 >= rule.num_clauses() {
        return Err(Error::InvalidArgument(format!(
            "clause {r0} out of range for R = {}",
            rule.num_clauses()
        )));
    }
    if rule.arity() != ds.num_columns() {
        return Err(Error::ArityMismatch {
            expected: rule.arity(),
            actual: ds.num_columns(),
        });
    }
    let sums: Vec<Vec<u32>> = (0..rule.num_clauses())
        .filter(|&r| r != r0)
        .map(|r| rule.clause(r).sums(ds))
        .collect();
    Ok((0..ds.len())
        .filter(|&i| ds.label(i) || sums.iter().all(|s| s[i] > 0))
        .collect())
}

/// Block coordinate descent on the minimal-Hamming objective, one clause per
/// step, starting from set cover.
///
/// A tentative update is accepted only if it does not raise the objective;
/// the search stops once an update fails to lower it strictly.
pub fn learn_bcd(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<(TwoLevelRule, LearnTrace)> {
    let (view, mut c) = cnf_view(ds, cfg)?;
    c.simple_threshold = None;
    let (rule, trace) = bcd_cnf(&view, &c)?;
    Ok((rule.with_form(cfg.form), trace))
}

fn bcd_cnf(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<(TwoLevelRule, LearnTrace)> {
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
    let r_total = rule.num_clauses();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stale = 0;

    for it in 1..=cfg.max_iters {
        let tried: Vec<usize> = match cfg.update_order {
            UpdateOrder::Greedy => (0..r_total).collect(),
            UpdateOrder::Cyclic => vec![(it - 1) % r_total],
            UpdateOrder::Random => vec![rng.random_range(0..r_total)],
        };
        let mut best: Option<(f64, usize, TwoLevelRule)> = None;
        for r in tried {
            let samples = bcd_filter_samples(ds, &rule, r)?;
            if samples.is_empty() {
                continue;
            }
            let sub = ds.subset(&samples, None);
            let (_, clause) = one_level(&sub, cfg.theta, &costs, &caps, binarizer, cfg.limits())?;
            let mut candidate = rule.clone();
            candidate.replace_clause(r, clause);
            let cost = hamming_cost(ds, &candidate, cfg.theta, &costs)?.total;
            if best.as_ref().is_none_or(|b| cost < b.0) {
                best = Some((cost, r, candidate));
            }
        }
        let Some((cost, r, candidate)) = best else {
            break;
        };
        let accepted = cost <= current;
        let improved = cost < current;
        trace.push(TraceRecord {
            iteration: it,
            objective: cost,
            phase: Phase::ClauseUpdate,
            clause: Some(r),
            accepted,
        });
        if accepted {
            rule = candidate;
            current = cost;
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
        }
        let patience = match cfg.update_order {
            UpdateOrder::Greedy => 1,
            UpdateOrder::Cyclic | UpdateOrder::Random => r_total,
        };
        if stale >= patience {
            break;
        }
    }
    debug_assert_eq!(rule.form(), Form::Cnf);
    Ok((rule, trace))
}
