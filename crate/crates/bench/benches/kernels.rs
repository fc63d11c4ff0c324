use criterion::{criterion_group, criterion_main, Criterion};
use piston_core::specfun::{bessel_j_sequence, bessel_k01, bessel_roots, kernel_k1prime, RootKind};
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    c.bench_function("k0_k1 small argument", |b| b.iter(|| bessel_k01(black_box(0.7))));
    c.bench_function("k0_k1 large argument", |b| b.iter(|| bessel_k01(black_box(12.5))));
    c.bench_function("kernel_k1prime", |b| b.iter(|| kernel_k1prime(black_box(3.3))));
    c.bench_function("j sequence order 60 at x=40", |b| b.iter(|| bessel_j_sequence(60, black_box(40.0))));
    c.bench_function("first 50 zeros of J_7", |b| b.iter(|| bessel_roots(7, black_box(50), RootKind::Value)));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
