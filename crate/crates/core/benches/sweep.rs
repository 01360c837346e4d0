//! A small Liver sweep run on the calling thread and on the rayon pool.

use std::path::PathBuf;

use boolrule::data::{load_csv, RawDataset, Schema};
use boolrule::learners::Algorithm;
use boolrule::par::Parallelism;
use boolrule::sweep::{run_sweep, SweepGrid, SweepOptions};
use criterion::{criterion_group, criterion_main, Criterion};

fn liver() -> RawDataset {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let schema = Schema::from_json_file(dir.join("liver.schema.json")).unwrap();
    let label = schema.label_column().unwrap().to_string();
    load_csv(dir.join("liver.csv"), &label, &schema).unwrap()
}

fn sweep(c: &mut Criterion) {
    let raw = liver();
    let grid = SweepGrid {
        algorithms: vec![Algorithm::Scn, Algorithm::Am],
        thetas: vec![1e-2, 1e-1, 1.0],
        rs: vec![1, 3],
        folds: 4,
        ..SweepGrid::default()
    };
    let mut group = c.benchmark_group("liver_sweep");
    group.sample_size(10);
    for (name, parallelism) in [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                run_sweep(
                    &raw,
                    &grid,
                    SweepOptions {
                        parallelism,
                        workers: None,
                    },
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
