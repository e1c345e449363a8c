use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use sparsenet_core::constructions::{junta_to_net, random_grid_net, JuntaSpec};
use sparsenet_core::fourier::{noise_sensitivity_mc, wht, CubeFunction};
use sparsenet_core::learners::{fit_decision_list, fit_low_degree, full_cube_data, uniform_data, DEFAULT_RIDGE, DEFAULT_TOL};
use sparsenet_core::network::{SparseNet, SparsityMode};
use sparsenet_core::seed::rng_from_seed;

fn junta(n: usize, p: usize) -> SparseNet {
    let mut rng = rng_from_seed(1);
    let table = (0..1 << p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    junta_to_net(&JuntaSpec::new(n, (1..=p).collect(), table).unwrap()).unwrap()
}

fn bench_wht(c: &mut Criterion) {
    let mut group = c.benchmark_group("wht");
    for n in [10, 14, 18] {
        let mut rng = rng_from_seed(2);
        let f = CubeFunction::from_values(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| wht(black_box(f))));
    }
    group.finish();
}

fn bench_exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive");
    group.sample_size(20);
    let net = junta(16, 4);
    group.bench_function("tabulate_n16", |b| b.iter(|| CubeFunction::from_net(black_box(&net)).unwrap()));
    group.bench_function("verify_n16", |b| {
        b.iter(|| net.verify_sparsity(1, SparsityMode::Exhaustive).unwrap())
    });
    group.finish();
}

fn bench_noise(c: &mut Criterion) {
    let f = CubeFunction::from_net(&junta(10, 3)).unwrap();
    c.bench_function("noise_mc_1e5", |b| b.iter(|| noise_sensitivity_mc(&f, 0.6, 100_000, 3).unwrap()));
}

fn bench_learners(c: &mut Criterion) {
    let mut group = c.benchmark_group("learners");
    group.sample_size(10);
    let target = junta(10, 3);
    let data = uniform_data(&target, 2000, 4).unwrap();
    group.bench_function("low_degree_n10_d3", |b| b.iter(|| fit_low_degree(&data, 3, DEFAULT_RIDGE).unwrap()));
    let net = random_grid_net(4, 3, 1, &mut rng_from_seed(5)).unwrap();
    let cube = full_cube_data(&net).unwrap();
    group.bench_function("dlist_n4_s3", |b| b.iter(|| fit_decision_list(&cube, 3, 1, DEFAULT_TOL).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_wht, bench_exhaustive, bench_noise, bench_learners);
criterion_main!(benches);
