use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{negation_map, BinaryDataset, Direction, FeatureMeta, GroupKey};
use crate::error::{Error, Result};

/// How much to trust column metadata when building the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verify {
    /// Check nesting and complements against the data.
    #[default]
    Assert,
    /// Trust the metadata.
    Fast,
}

/// Which combinations inside one group are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// At most one column per direction.
    NoDisable,
    /// Additionally no complementary pair and no zigzag pair, which leaves
    /// only pairs `{c <= ta, c > tb}` with `ta < tb`.
    Disable,
}

impl Regime {
    pub fn for_dataset(ds: &BinaryDataset) -> Self {
        if ds.has_disable_column() {
            Regime::Disable
        } else {
            Regime::NoDisable
        }
    }
}

/// Columns derived from one source feature (or one category of it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyGroup {
    pub origin: usize,
    pub category: Option<String>,
    pub is_disable: bool,
    /// `(column, threshold)` for `<=` columns, thresholds increasing. Each
    /// column implies the next one row-wise.
    pub leq: Vec<(usize, Option<f64>)>,
    /// `(column, threshold)` for `>` columns, thresholds increasing. Each
    /// column is implied by the previous one row-wise.
    pub gt: Vec<(usize, Option<f64>)>,
    /// Row-wise complementary `(leq, gt)` column pairs.
    pub complements: Vec<(usize, usize)>,
}

impl RedundancyGroup {
    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.leq.iter().chain(&self.gt).map(|&(j, _)| j)
    }

    pub fn len(&self) -> usize {
        self.leq.len() + self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Partition of all columns into redundancy groups, ordered by group key so
/// the result does not depend on column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyIndex {
    pub groups: Vec<RedundancyGroup>,
    /// Group of every column.
    pub group_of: Vec<usize>,
}

impl RedundancyIndex {
    /// Metadata-only index.
    pub fn from_meta(columns: &[FeatureMeta]) -> Result<Self> {
        let neg = negation_map(columns)?;
        let mut by_key: BTreeMap<GroupKey, RedundancyGroup> = BTreeMap::new();
        for (j, m) in columns.iter().enumerate() {
            let g = by_key.entry(m.group()).or_insert_with(|| RedundancyGroup {
                origin: m.origin,
                category: m.category.clone(),
                is_disable: m.is_disable,
                leq: Vec::new(),
                gt: Vec::new(),
                complements: Vec::new(),
            });
            if m.is_disable {
                g.gt.push((j, None));
                continue;
            }
            match m.direction {
                Direction::Leq => g.leq.push((j, m.threshold)),
                Direction::Gt => g.gt.push((j, m.threshold)),
            }
            if m.direction == Direction::Leq {
                if let Some(k) = neg[j] {
                    g.complements.push((j, k));
                }
            }
        }
        let mut groups: Vec<RedundancyGroup> = by_key.into_values().collect();
        for g in &mut groups {
            for chain in [&mut g.leq, &mut g.gt] {
                chain.sort_by(|a, b| cmp_threshold(a.1, b.1));
                for w in chain.windows(2) {
                    let strictly = match (w[0].1, w[1].1) {
                        (Some(a), Some(b)) => a < b,
                        _ => false,
                    };
                    if !strictly {
                        return Err(Error::InconsistentMetadata(format!(
                            "columns {} and {} do not have strictly increasing thresholds",
                            w[0].0, w[1].0
                        )));
                    }
                }
            }
            g.complements.sort_unstable();
        }
        let mut group_of = vec![usize::MAX; columns.len()];
        for (gi, g) in groups.iter().enumerate() {
            for j in g.columns() {
                group_of[j] = gi;
            }
        }
        Ok(Self { groups, group_of })
    }

    /// Index for `ds`; in [`Verify::Assert`] mode every nesting and
    /// complement relation is checked row by row.
    pub fn build(ds: &BinaryDataset, verify: Verify) -> Result<Self> {
        let idx = Self::from_meta(ds.columns())?;
        if verify == Verify::Assert {
            idx.check(ds)?;
        }
        Ok(idx)
    }

    fn check(&self, ds: &BinaryDataset) -> Result<()> {
        let implies = |a: usize, b: usize| ds.column(a).iter().zip(ds.column(b)).all(|(&x, &y)| x <= y);
        for g in &self.groups {
            for w in g.leq.windows(2) {
                if !implies(w[0].0, w[1].0) {
                    return Err(Error::InconsistentMetadata(format!(
                        "column {} does not imply column {}",
                        w[0].0, w[1].0
                    )));
                }
            }
            for w in g.gt.windows(2) {
                if !implies(w[1].0, w[0].0) {
                    return Err(Error::InconsistentMetadata(format!(
                        "column {} does not imply column {}",
                        w[1].0, w[0].0
                    )));
                }
            }
            for &(a, b) in &g.complements {
                if ds.column(a).iter().zip(ds.column(b)).any(|(&x, &y)| x + y != 1) {
                    return Err(Error::InconsistentMetadata(format!(
                        "columns {a} and {b} are not complements"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, g: usize) -> &RedundancyGroup {
        &self.groups[g]
    }
}

fn cmp_threshold(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
    }
}

/// Admissible column subsets of group `g`, each sorted ascending: the empty
/// set, every singleton, then `{leq, gt}` pairs allowed by `regime`. The
/// disable column is only offered in the disable regime.
pub fn enumerate_candidates(idx: &RedundancyIndex, g: usize, regime: Regime) -> Vec<Vec<usize>> {
    let group = &idx.groups[g];
    let mut out = vec![Vec::new()];
    if group.is_disable {
        if regime == Regime::Disable {
            out.extend(group.columns().map(|j| vec![j]));
        }
        return out;
    }
    out.extend(group.columns().map(|j| vec![j]));
    for &(a, ta) in &group.leq {
        for &(b, tb) in &group.gt {
            let allowed = match regime {
                Regime::NoDisable => true,
                Regime::Disable => matches!((ta, tb), (Some(x), Some(y)) if x < y),
            };
            if allowed {
                let mut pair = vec![a, b];
                pair.sort_unstable();
                out.push(pair);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six() -> BinaryDataset {
        let values = [0.5, 1.5, 2.5, 3.5];
        let t = [1.0, 2.0, 3.0];
        let mut cols = Vec::new();
        for dir in [Direction::Leq, Direction::Gt] {
            cols.extend(t.iter().map(|&x| FeatureMeta::thresholded(0, x, dir)));
        }
        let m = values
            .iter()
            .map(|&v| {
                t.iter()
                    .map(|&x| (v <= x) as u8)
                    .chain(t.iter().map(|&x| (v > x) as u8))
                    .collect()
            })
            .collect();
        BinaryDataset::new(m, vec![true, false, true, false], cols, vec!["c".into()]).unwrap()
    }

    #[test]
    fn six_column_structure() {
        let idx = RedundancyIndex::build(&six(), Verify::Assert).unwrap();
        assert_eq!(idx.num_groups(), 1);
        let g = idx.group(0);
        assert_eq!(g.leq.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(g.gt.iter().map(|x| x.0).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(g.complements, vec![(0, 3), (1, 4), (2, 5)]);
    }

    #[test]
    fn candidate_counts() {
        let ds = six();
        let idx = RedundancyIndex::build(&ds, Verify::Fast).unwrap();
        let dis = enumerate_candidates(&idx, 0, Regime::Disable);
        assert_eq!(dis.len(), 10);
        assert!(dis.contains(&vec![0, 4]) && dis.contains(&vec![0, 5]) && dis.contains(&vec![1, 5]));
        assert_eq!(enumerate_candidates(&idx, 0, Regime::NoDisable).len(), 1 + 6 + 9);
    }

    #[test]
    fn native_binary_pair() {
        let ds = BinaryDataset::with_negations(vec![vec![0], vec![1]], vec![false, true]).unwrap();
        let idx = RedundancyIndex::build(&ds, Verify::Assert).unwrap();
        assert_eq!(idx.group(0).complements, vec![(1, 0)]);
        assert_eq!(enumerate_candidates(&idx, 0, Regime::Disable).len(), 3);
        assert_eq!(enumerate_candidates(&idx, 0, Regime::NoDisable).len(), 4);
    }

    #[test]
    fn assert_mode_catches_bad_metadata() {
        // c <= 1 holds on a row where c <= 2 does not
        let cols = vec![
            FeatureMeta::thresholded(0, 1.0, Direction::Leq),
            FeatureMeta::thresholded(0, 2.0, Direction::Leq),
        ];
        let ds = BinaryDataset::new(vec![vec![1, 0], vec![0, 0]], vec![true, false], cols, vec!["c".into()]).unwrap();
        assert!(RedundancyIndex::build(&ds, Verify::Fast).is_ok());
        assert!(matches!(
            RedundancyIndex::build(&ds, Verify::Assert),
            Err(Error::InconsistentMetadata(_))
        ));
    }

    #[test]
    fn disable_group() {
        let ds = six().append_disable_column().unwrap();
        let idx = RedundancyIndex::build(&ds, Verify::Assert).unwrap();
        let g = idx.group_of[0];
        assert!(idx.group(g).is_disable);
        assert_eq!(enumerate_candidates(&idx, g, Regime::Disable), vec![vec![], vec![0]]);
        assert_eq!(enumerate_candidates(&idx, g, Regime::NoDisable), vec![Vec::<usize>::new()]);
    }
}
