use coupled_fp::{check_samet, check_symmetric_mk, estimate_delta_curve};
use coupled_fp_bench::{finite, real};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

fn sampled(c: &mut Criterion) {
    let inst = real("samet_example");
    let (space, op) = (&inst.space, inst.operator.as_ref());
    let eighth = |e: &f64| e / 8.0;
    let grid = [0.1, 1.0, 10.0];
    let mut group = c.benchmark_group("sampled");
    for samples in [1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::new("symmetric_mk", samples), &samples, |b, &n| {
            b.iter(|| check_symmetric_mk(space, op, &grid, &eighth, n, 42).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("samet_mk", samples), &samples, |b, &n| {
            b.iter(|| check_samet(space, op, &grid, &eighth, n, 42).unwrap())
        });
    }
    group.bench_function("delta_curve", |b| b.iter(|| estimate_delta_curve(space, op, &grid, 1_000, 42).unwrap()));
    group.finish();
}

fn exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive");
    for name in ["chain3", "diamond"] {
        let inst = finite(name);
        let eighth = |e: &BigRational| e / BigRational::from_integer(8.into());
        group.bench_function(BenchmarkId::new("symmetric_mk", name), |b| {
            b.iter(|| {
                check_symmetric_mk(&inst.space, inst.operator.as_ref(), &inst.default_epsilon_grid, &eighth, 1, 0)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sampled, exhaustive);
criterion_main!(benches);
