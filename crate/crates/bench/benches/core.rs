use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entsub_bench::{generic_family, harmonic_2d, planar_frame};
use entsub_core::gaussopt::{self, GapOptions};
use entsub_core::{entropy, family, spectral, DensityGrid, GaussianSpec, Mat};
use std::hint::black_box;

fn feasibility(c: &mut Criterion) {
    let mut g = c.benchmark_group("feasibility");
    for m in [6, 10, 14] {
        let (a, w) = generic_family(3, m);
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| family::feasibility(black_box(&a), black_box(&w), 1e-9).unwrap())
        });
    }
    g.finish();
}

fn optimizer(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximize_gap");
    for (n, m) in [(2, 5), (3, 8), (5, 12)] {
        let (a, w) = generic_family(n, m);
        g.bench_with_input(BenchmarkId::new("generic", format!("{n}x{m}")), &n, |b, _| {
            b.iter(|| gaussopt::maximize_gap(black_box(&a), black_box(&w), &GapOptions::default()).unwrap())
        });
    }
    let (a, w) = planar_frame(7);
    g.bench_function("constant/planar7", |b| b.iter(|| gaussopt::constant(black_box(&a), black_box(&w)).unwrap()));
    g.finish();
}

fn grids(c: &mut Criterion) {
    let (a, w) = planar_frame(3);
    let ax = entsub_core::Axis::new(-8.0, 8.0, 128).unwrap();
    let f = DensityGrid::gaussian(vec![ax, ax], &GaussianSpec::new(Mat::identity(2, 2)).unwrap()).unwrap();
    c.bench_function("subadditivity_gap/128^2", |b| b.iter(|| entropy::subadditivity_gap(black_box(&f), &a, &w).unwrap()));
    c.bench_function("fisher/128^2", |b| b.iter(|| entropy::fisher(black_box(&f)).unwrap()));
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("lambda_2d");
    g.sample_size(10);
    for cells in [48, 96] {
        let v = harmonic_2d(cells);
        g.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, _| {
            b.iter(|| spectral::lambda_2d(black_box(&v)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, feasibility, optimizer, grids, eigen);
criterion_main!(benches);
