use super::one_level::{one_level, ClauseBinarizer};
use super::{cnf_view, LearnConfig};
use crate::binarization::Objective;
use crate::data::BinaryDataset;
use crate::error::Result;
use crate::rule_model::{Clause, Form, TwoLevelRule};

/// Sequential covering: each new clause is learned on the samples that every
/// earlier clause still lets through.
///
/// A sample whose clause output is 0 is predicted 0 whatever follows, so it is
/// dropped. Once no sample is left, or only negatives are, the training
/// predictions are all 0 and the remaining clauses are filled with the
/// disable column (when allowed) or left empty.
pub fn learn_set_cover(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<TwoLevelRule> {
    let (view, c) = cnf_view(ds, cfg)?;
    Ok(set_cover_cnf(&view, &c)?.with_form(cfg.form))
}

pub(crate) fn clause_binarizer(cfg: &LearnConfig) -> ClauseBinarizer {
    match cfg.simple_threshold {
        Some(tau) => ClauseBinarizer::Simple(tau),
        None => ClauseBinarizer::Redundancy(cfg.binarize_options(Objective::Hamming)),
    }
}

pub(crate) fn filler(ds: &BinaryDataset, cfg: &LearnConfig) -> Clause {
    match ds.disable_column() {
        Some(k) if cfg.allow_disable => Clause::from_selected(ds.num_columns(), &[k]),
        _ => Clause::empty(ds.num_columns()),
    }
}

/// Set cover on a CNF view whose config already carries column costs.
pub(crate) fn set_cover_cnf(ds: &BinaryDataset, cfg: &LearnConfig) -> Result<TwoLevelRule> {
    let costs = cfg.costs_for(ds)?;
    let caps = cfg.weight_caps(ds);
    let binarizer = clause_binarizer(cfg);
    let mut remaining: Vec<usize> = (0..ds.len()).collect();
    let mut clauses = Vec::with_capacity(cfg.r);
    for _ in 0..cfg.r {
        if !remaining.iter().any(|&i| ds.label(i)) {
            break;
        }
        let sub = ds.subset(&remaining, None);
        let (_, clause) = one_level(&sub, cfg.theta, &costs, &caps, binarizer, cfg.limits())?;
        let sums = clause.sums(&sub);
        remaining = remaining
            .iter()
            .zip(&sums)
            .filter(|&(_, &s)| s > 0)
            .map(|(&i, _)| i)
            .collect();
        clauses.push(clause);
    }
    while clauses.len() < cfg.r {
        clauses.push(filler(ds, cfg));
    }
    TwoLevelRule::new(clauses, Form::Cnf)
}
