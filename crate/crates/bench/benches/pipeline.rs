use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use jcat_bench::scaled_fixture;
use jcat_core::classify::{Forest, ForestParams};
use jcat_core::cluster::{gower_matrix, k_medoids, GowerOptions, KMedoidsParams};
use jcat_core::featsel::{best_first_cfs, DEFAULT_STALL_LIMIT};

fn opts(parallel: bool) -> GowerOptions {
    GowerOptions {
        categorical_match: false,
        weights: None,
        parallel,
    }
}

fn bench_gower(c: &mut Criterion) {
    let x = scaled_fixture(340, 1);
    c.bench_function("gower_matrix/340", |b| {
        b.iter(|| gower_matrix(black_box(&x), &opts(false)).unwrap())
    });
}

fn bench_pam(c: &mut Criterion) {
    let x = scaled_fixture(340, 2);
    let d = gower_matrix(&x, &opts(true)).unwrap();
    c.bench_function("k_medoids/340/k3", |b| {
        b.iter(|| k_medoids(black_box(&d), &KMedoidsParams::new(3)).unwrap())
    });
}

fn labels(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| i * k / n).collect()
}

fn bench_forest(c: &mut Criterion) {
    let x = scaled_fixture(340, 3);
    let y = labels(x.n_rows(), 3);
    let params = ForestParams::random_forest();
    c.bench_function("random_forest/340/100", |b| {
        b.iter(|| Forest::fit(black_box(&x.values), &y, 3, &params, 7, false).unwrap())
    });
}

fn bench_cfs(c: &mut Criterion) {
    let x = scaled_fixture(340, 4);
    let y = labels(x.n_rows(), 3);
    c.bench_function("best_first_cfs/340", |b| {
        b.iter(|| best_first_cfs(black_box(&x), &y, DEFAULT_STALL_LIMIT).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_gower, bench_pam, bench_forest, bench_cfs
}
criterion_main!(benches);
