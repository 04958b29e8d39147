use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use igs_bench::cylinder_problem;
use igs_core::smoothing::{assemble, select_lambda, solve_fixed_lambda, LambdaSearch};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for side in [7, 9, 11] {
        let (s, obs, quad) = cylinder_problem(2, side, 10);
        g.bench_with_input(BenchmarkId::from_parameter(side * side), &side, |b, _| {
            b.iter(|| assemble(black_box(&s), &obs, &quad).unwrap())
        });
    }
    g.finish();
}

fn solves(c: &mut Criterion) {
    let (s, obs, quad) = cylinder_problem(2, 9, 10);
    let sys = assemble(&s, &obs, &quad).unwrap();
    let y = obs.values();
    c.bench_function("solve_fixed_lambda/81", |b| {
        b.iter(|| solve_fixed_lambda(&sys, black_box(y), 1e-4).unwrap())
    });
    c.bench_function("select_lambda/81", |b| {
        b.iter(|| select_lambda(&sys, black_box(y), &LambdaSearch::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = assembly, solves
}
criterion_main!(benches);
