//! Benchmarks for the distance, transform, and realization hot paths.

use criterion::{criterion_group, criterion_main, Criterion};

use steinlab::{bounds, metrics, transforms, Dist};
use steinlab_bench::{levy_truncation, scaled_nb, uniform01};

fn bench_distances(c: &mut Criterion) {
    let g1 = Dist::Gamma { r: 2.0, alpha: 3.0 };
    let g2 = Dist::Gamma { r: 1.0, alpha: 1.0 };
    c.bench_function("wasserstein gamma pair", |b| {
        b.iter(|| metrics::wasserstein(&g1, &g2, 1e-8).unwrap())
    });
    c.bench_function("kolmogorov gamma pair", |b| {
        b.iter(|| metrics::kolmogorov(&g1, &g2, 1e-8).unwrap())
    });
    let nb = scaled_nb(2.0, 0.1);
    let target = Dist::Gamma { r: 1.8, alpha: 1.0 };
    c.bench_function("wasserstein lattice vs gamma", |b| {
        b.iter(|| metrics::wasserstein(&nb, &target, 1e-7).unwrap())
    });
}

fn bench_transforms(c: &mut Criterion) {
    let u = uniform01();
    c.bench_function("zero bias of a generic law", |b| {
        b.iter(|| transforms::zero_bias(&u).unwrap())
    });
    c.bench_function("theta of a generic law", |b| {
        b.iter(|| transforms::theta_exact(&u).unwrap())
    });
}

fn bench_realizations(c: &mut Criterion) {
    c.bench_function("compound law with continuous jumps", |b| {
        b.iter(|| levy_truncation(0.1).to_numeric(1e-6).unwrap())
    });
    c.bench_function("coupling estimate of theta for a sum", |b| {
        b.iter(|| bounds::conv_theta(&[(1.0, 1.0), (2.0, 1.5)], 0, 10_000).unwrap())
    });
}

criterion_group!(
    benches,
    bench_distances,
    bench_transforms,
    bench_realizations
);
criterion_main!(benches);
