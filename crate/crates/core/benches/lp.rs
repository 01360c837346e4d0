//! Simplex on relaxations of growing size.

use boolrule::data::BinaryDataset;
use boolrule::learners::tlp_program;
use boolrule::lp::{solve, SolveLimits};
use boolrule::rule_model::ColumnCosts;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset(n: usize, d: usize) -> BinaryDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows = (0..n).map(|_| (0..d).map(|_| rng.random_range(0..2u8)).collect()).collect();
    let labels = (0..n).map(|_| rng.random_bool(0.4)).collect();
    BinaryDataset::with_negations(rows, labels).unwrap()
}

fn relaxation(c: &mut Criterion) {
    let mut group = c.benchmark_group("two_level_relaxation");
    group.sample_size(10);
    for n in [50, 100, 200] {
        let ds = dataset(n, 8);
        let costs = ColumnCosts::for_dataset(&ds);
        let caps = vec![1.0; ds.num_columns()];
        let prog = tlp_program(&ds, 1e-2, 2, &costs, &caps, true);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prog.lp, |b, lp| {
            b.iter(|| solve(lp, SolveLimits::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, relaxation);
criterion_main!(benches);
