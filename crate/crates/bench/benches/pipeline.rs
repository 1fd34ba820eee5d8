use cechsim_core::cech::{cech_complex, cech_filtration, Miniball};
use cechsim_core::homology::Persistence;
use cechsim_core::sampling::{sample_binomial, DensitySpec};
use cechsim_core::MetricSpec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn miniball(c: &mut Criterion) {
    let mut group = c.benchmark_group("miniball");
    for dim in [2usize, 3] {
        let cloud = sample_binomial(&DensitySpec::unit_cube(dim), 4096, 1).unwrap();
        let sets: Vec<Vec<&[f64]>> =
            (0..1024).map(|i| (0..=dim).map(|k| cloud.point(i * (dim + 1) % 4000 + k)).collect()).collect();
        let mut ball = Miniball::new(dim);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &sets, |b, sets| {
            b.iter(|| sets.iter().map(|s| ball.radius(black_box(s))).sum::<f64>())
        });
    }
    group.finish();
}

fn cech_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("cech_build");
    group.sample_size(10);
    for (dim, r) in [(2usize, 0.6), (2, 1.0), (3, 0.5)] {
        let n = 10_000;
        let cloud = sample_binomial(&DensitySpec::unit_cube(dim), n, 2).unwrap();
        let r_n = r * (n as f64).powf(-1.0 / dim as f64);
        let metric = MetricSpec::euclidean(dim);
        group.bench_function(format!("N={dim} r={r}"), |b| b.iter(|| cech_complex(&cloud, r_n, &metric, dim).unwrap()));
    }
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduction");
    group.sample_size(10);
    for (dim, r) in [(2usize, 0.6), (2, 1.0), (3, 0.5)] {
        let n = 10_000;
        let cloud = sample_binomial(&DensitySpec::unit_cube(dim), n, 3).unwrap();
        let r_n = r * (n as f64).powf(-1.0 / dim as f64);
        let filtration = cech_filtration(&cloud, &MetricSpec::euclidean(dim), dim, r_n).unwrap();
        group.bench_function(format!("N={dim} r={r}"), |b| b.iter(|| Persistence::compute(&filtration, dim)));
    }
    group.finish();
}

criterion_group!(benches, miniball, cech_build, reduction);
criterion_main!(benches);
