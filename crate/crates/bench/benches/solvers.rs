use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use pinney_bench::fixtures;
use pinney_core::{
    cross_validate, find_singularities, integrate_pair_over, parse_coefficient, solve, Method, SolverConfig,
};

fn bench_solve(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve");
    for fx in fixtures() {
        let (lo, hi) = fx.range;
        for method in [Method::Superposition, Method::Direct] {
            group.bench_with_input(BenchmarkId::new(method.to_string(), fx.name), &fx, |b, fx| {
                b.iter(|| solve(black_box(&fx.problem), lo, hi, 500, &cfg, method).unwrap())
            });
        }
        if fx.problem.constant_coefficient().is_some() {
            group.bench_with_input(BenchmarkId::new("closed-form", fx.name), &fx, |b, fx| {
                b.iter(|| solve(black_box(&fx.problem), lo, hi, 500, &cfg, Method::ClosedForm).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_pair(c: &mut Criterion) {
    let fx = &fixtures()[1];
    let (lo, hi) = fx.range;
    let mut group = c.benchmark_group("pair");
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let cfg = SolverConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            ..SolverConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(tol), &cfg, |b, cfg| {
            b.iter(|| integrate_pair_over(black_box(&fx.problem), lo, hi, cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_misc(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let fx = &fixtures()[2];
    let (lo, hi) = fx.range;
    c.bench_function("singularities", |b| {
        b.iter(|| find_singularities(black_box(&fx.problem), lo, hi, &cfg, 1e-10).unwrap())
    });
    c.bench_function("cross_validate", |b| {
        b.iter(|| cross_validate(black_box(&fx.problem), lo, hi, 200, &cfg).unwrap())
    });
    let text = "1 + 0.5*sin(x) - exp(-x^2)*tanh(2*x) + sqrt(abs(cos(x)))";
    c.bench_function("parse", |b| b.iter(|| parse_coefficient(black_box(text)).unwrap()));
    let spec = parse_coefficient(text).unwrap();
    c.bench_function("eval", |b| b.iter(|| spec.eval(black_box(0.3)).unwrap()));
}

criterion_group!(benches, bench_solve, bench_pair, bench_misc);
criterion_main!(benches);
