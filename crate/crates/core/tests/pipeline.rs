//! Sweep harness invariants on the bundled Liver data.

use std::collections::BTreeMap;
use std::path::PathBuf;

use boolrule::data::{load_csv, stratified_folds, BinarizationPlan, RawColumn, RawDataset, RawFeature, Schema};
use boolrule::learners::{learn, Algorithm, LearnConfig};
use boolrule::par::Parallelism;
use boolrule::rule_model::{predict_all, Form, RuleDocument};
use boolrule::sweep::{
    min_error_table, pareto_front, prepare_folds, run_sweep, Split, SweepGrid, SweepOptions, SweepRecord,
};

fn liver() -> RawDataset {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let schema = Schema::from_json_file(dir.join("liver.schema.json")).unwrap();
    let label = schema.label_column().unwrap().to_string();
    load_csv(dir.join("liver.csv"), &label, &schema).unwrap()
}

fn small_grid() -> SweepGrid {
    SweepGrid {
        algorithms: vec![Algorithm::Scs, Algorithm::Bcd],
        thetas: vec![1e-2, 0.2, 2.0],
        rs: vec![1, 2],
        folds: 3,
        seed: 9,
        ..SweepGrid::default()
    }
}

#[test]
fn test_rows_never_influence_fold_binarization() {
    let raw = liver();
    let grid = small_grid();
    let folds = stratified_folds(raw.labels(), grid.folds, grid.seed).unwrap();
    let (_, clean) = prepare_folds(&raw, &grid).unwrap();
    for (f, fold) in clean.iter().enumerate() {
        // Overwrite every held-out value with an outlier and redo the fold.
        let test = folds.test_indices(f);
        let features = raw
            .features()
            .iter()
            .map(|feat| {
                let mut column = feat.column.clone();
                if let RawColumn::Continuous(v) = &mut column {
                    for &i in &test {
                        v[i] = 1e9;
                    }
                }
                RawFeature {
                    name: feat.name.clone(),
                    column,
                }
            })
            .collect();
        let poisoned = RawDataset::new(features, raw.labels().to_vec()).unwrap();
        let (_, dirty) = prepare_folds(&poisoned, &grid).unwrap();
        assert_eq!(dirty[f].plan, fold.plan, "fold {f}");
        assert_eq!(dirty[f].train, fold.train, "fold {f}");
        assert_eq!(fold.test.columns(), fold.train.columns());
        assert_eq!(fold.plan, BinarizationPlan::fit(&raw, &folds.train_indices(f), grid.quantiles).unwrap());
    }
}

fn without_times(records: &[SweepRecord]) -> Vec<SweepRecord> {
    records
        .iter()
        .cloned()
        .map(|mut r| {
            r.wall_time_ms = 0.0;
            r
        })
        .collect()
}

#[test]
fn sweep_reports_agree_with_raw_records() {
    let raw = liver();
    let grid = small_grid();
    let res = run_sweep(&raw, &grid, SweepOptions::default()).unwrap();
    let seq = run_sweep(
        &raw,
        &grid,
        SweepOptions {
            parallelism: Parallelism::Sequential,
            workers: None,
        },
    )
    .unwrap();
    assert_eq!(without_times(&res.records), without_times(&seq.records));
    assert_eq!(res.records.len(), grid.num_cells());

    // independent aggregation: mean test error per cell, then minimum over theta
    let mut cells: BTreeMap<(Algorithm, usize, u64), Vec<&SweepRecord>> = BTreeMap::new();
    for r in &res.records {
        assert!(r.is_ok(), "{:?}", r.error);
        cells.entry((r.algorithm, r.r, r.theta.to_bits())).or_default().push(r);
    }
    let mean = |v: &[&SweepRecord], f: fn(&SweepRecord) -> f64| v.iter().map(|r| f(r)).sum::<f64>() / v.len() as f64;
    let table = min_error_table(&res);
    assert_eq!(table.len(), grid.algorithms.len() * grid.rs.len());
    for row in &table {
        let best = cells
            .iter()
            .filter(|((a, r, _), _)| *a == row.algorithm && *r == row.r)
            .map(|(_, v)| mean(v, |r| r.test_error.unwrap()))
            .fold(f64::INFINITY, f64::min);
        assert!((row.test_error - best).abs() < 1e-12);
        let at = &cells[&(row.algorithm, row.r, row.theta.to_bits())];
        assert!((mean(at, |r| r.test_error.unwrap()) - best).abs() < 1e-12);
        assert!((mean(at, |r| r.feature_count.unwrap() as f64) - row.feature_count).abs() < 1e-12);
    }

    // every front point is a cell of the sweep, and no cell dominates it
    for &a in &grid.algorithms {
        for &r in &grid.rs {
            for split in [Split::Train, Split::Test] {
                let front = pareto_front(&res, a, r, split);
                assert!(!front.points.is_empty());
                let pts: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|((ca, cr, _), _)| *ca == a && *cr == r)
                    .map(|(_, v)| {
                        let err = match split {
                            Split::Train => mean(v, |x| x.train_error.unwrap()),
                            Split::Test => mean(v, |x| x.test_error.unwrap()),
                        };
                        (mean(v, |x| x.feature_count.unwrap() as f64), err)
                    })
                    .collect();
                for p in &front.points {
                    assert!(pts.iter().any(|&(f, e)| (f - p.feature_count).abs() < 1e-12 && (e - p.error).abs() < 1e-12));
                    assert!(!pts.iter().any(|&(f, e)| f <= p.feature_count && e <= p.error && (f < p.feature_count || e < p.error)));
                }
            }
        }
    }
}

#[test]
fn saved_rules_predict_like_the_learned_rule() {
    let raw = liver();
    let rows: Vec<usize> = (0..raw.len()).collect();
    let plan = BinarizationPlan::fit(&raw, &rows, 9).unwrap();
    let ds = plan.apply(&raw, &rows).unwrap();
    for form in [Form::Dnf, Form::Cnf] {
        let l = learn(&ds, Algorithm::Am, &LearnConfig::new(0.05, 3).with_form(form)).unwrap();
        let doc = RuleDocument::new(&l.rule, ds.columns(), ds.origin_names()).unwrap();
        let back = RuleDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_rule().unwrap(), l.rule);
        assert_eq!(back.predict_raw(&raw).unwrap(), predict_all(&ds, &l.rule).unwrap());
    }
}
