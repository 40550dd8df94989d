use agewise_bench::{pool, three_server_policy, two_server_policy, u};
use agewise_core::opt::{Engine, SubsetOrder};
use agewise_core::{analyze, optimize, simulate, Objective, SearchSpec, SimConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn moments(c: &mut Criterion) {
    let uniform = u().service;
    c.bench_function("factorial moments 1..=20, Unif[12,18]", |b| {
        b.iter(|| {
            (1..=20)
                .map(|i| uniform.factorial_moment(i).unwrap())
                .sum::<f64>()
        })
    });
}

fn analysis(c: &mut Criterion) {
    let policy = three_server_policy();
    c.bench_function("analyze [M1,G,U](5,10,20)", |b| {
        b.iter(|| analyze(black_box(&policy)).unwrap())
    });
    let sol = analyze(&policy).unwrap();
    c.bench_function("pmf to 1e-12 coverage", |b| {
        b.iter(|| sol.coverage_point(black_box(1e-12)))
    });
    c.bench_function("mean and violation(100)", |b| {
        b.iter(|| sol.mean_aoi() + sol.violation_probability(black_box(100)))
    });
}

fn simulation(c: &mut Criterion) {
    let cfg = SimConfig::new(two_server_policy(), 1_000_000, 1);
    c.bench_function("simulate 1e6 slots [M1,G](10,20)", |b| {
        b.iter(|| simulate(black_box(&cfg)).unwrap())
    });
}

fn optimization(c: &mut Criterion) {
    let engine = Engine::new(&pool(), &Objective::Mean, 200).unwrap();
    c.bench_function("engine evaluate one three-server tuple", |b| {
        b.iter(|| {
            engine
                .evaluate(black_box(&[0, 1, 2]), black_box(&[5, 10, 20]))
                .unwrap()
        })
    });
    let spec = SearchSpec {
        pool: pool(),
        max_servers: 3,
        tau_max: 60,
        budgets: vec![0.5, 2.0, 8.0],
        objective: Objective::Mean,
        order: SubsetOrder::MeanDescending,
    };
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    group.bench_function("three servers, tau_max 60", |b| {
        b.iter(|| optimize(black_box(&spec)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, moments, analysis, simulation, optimization);
criterion_main!(benches);
