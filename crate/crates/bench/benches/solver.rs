use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rotstar_bench::solver;
use rotstar_core::surface::surface_profile;
use rotstar_core::{solve_lane_emden, Solver, SolverConfig};

fn lane_emden(c: &mut Criterion) {
    let mut group = c.benchmark_group("lane_emden");
    for nu in [1.5, 3.0, 4.5] {
        group.bench_with_input(BenchmarkId::from_parameter(nu), &nu, |b, &nu| {
            b.iter(|| solve_lane_emden(black_box(nu), 1e-12).unwrap())
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let s = solver(3.0);
    let theta = s.core().theta().clone();
    c.bench_function("apply_g", |b| {
        b.iter(|| s.core().apply_g(black_box(&theta)))
    });
    c.bench_function("resolvent_apply", |b| {
        b.iter(|| s.resolvent().apply(black_box(s.g())))
    });
    c.bench_function("build_resolvent", |b| {
        b.iter(|| s.core().build_resolvent().unwrap())
    });
    c.bench_function("solver_setup", |b| {
        b.iter(|| Solver::new(black_box(&SolverConfig::default())).unwrap())
    });
}

fn full_solve(c: &mut Criterion) {
    let s = solver(3.0);
    let mut group = c.benchmark_group("solve");
    for eps in [1e-3, 4e-3] {
        group.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| s.solve(black_box(eps)).unwrap())
        });
    }
    group.finish();
    let sol = s.solve(1e-3).unwrap();
    c.bench_function("surface_profile_33", |b| {
        b.iter(|| surface_profile(black_box(&sol), 33).unwrap())
    });
}

criterion_group!(benches, lane_emden, operators, full_solve);
criterion_main!(benches);
