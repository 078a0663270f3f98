use coupled_fp::{multi_start_uniqueness, solve, PairPoint, SolveOptions};
use coupled_fp_bench::{finite, real};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn picard(c: &mut Criterion) {
    let inst = real("samet_example");
    let opts = SolveOptions::new(1e-10, 10_000);
    c.bench_function("solve/samet_example", |b| {
        b.iter(|| solve(&inst.space, inst.operator.as_ref(), black_box(&PairPoint::new(-3.0, 3.0)), &opts).unwrap())
    });

    let chain = finite("chain3");
    let tol = num_rational::BigRational::new(1.into(), 1_000_000.into());
    let exact = SolveOptions::new(tol, 100);
    c.bench_function("solve/chain3", |b| {
        b.iter(|| solve(&chain.space, chain.operator.as_ref(), black_box(&chain.default_start), &exact).unwrap())
    });
}

fn uniqueness(c: &mut Criterion) {
    let inst = real("samet_example");
    let starts = inst.admissible_starts(10, 42).unwrap();
    let opts = SolveOptions::new(1e-10, 10_000);
    c.bench_function("uniqueness/samet_example/10", |b| {
        b.iter(|| multi_start_uniqueness(&inst.space, inst.operator.as_ref(), black_box(&starts), &opts).unwrap())
    });
}

criterion_group!(benches, picard, uniqueness);
criterion_main!(benches);
