use criterion::{criterion_group, criterion_main, Criterion};
use piston_bench::{square_spectrum, unit_circle_radius};
use piston_core::billiards::{weyl_data, BoundaryCondition, Shape};
use piston_core::casimir::{circle_force_contour, force_curve, piston_force, ContourConfig, ForceSource, TruncationPolicy};
use piston_core::numerics::log_grid;
use std::hint::black_box;

fn forces(c: &mut Criterion) {
    let spectrum = square_spectrum(250.0);
    let policy = TruncationPolicy::for_spectrum_bound(25.0, 250.0).unwrap();
    c.bench_function("square force at a_min", |b| b.iter(|| piston_force(&spectrum, black_box(policy.a_min), &policy)));
    c.bench_function("square force at a=1", |b| b.iter(|| piston_force(&spectrum, black_box(1.0), &policy)));

    let weyl = weyl_data(&Shape::unit_square(), BoundaryCondition::Dirichlet);
    let grid = log_grid(policy.a_min, 2.0, 10);
    c.bench_function("square force curve 17 points", |b| {
        b.iter(|| force_curve(ForceSource::Single { spectrum: &spectrum, weyl: &weyl }, &grid, &policy, "square"))
    });

    let r = unit_circle_radius();
    let cfg = ContourConfig::default();
    c.bench_function("circle contour force a=0.3", |b| {
        b.iter(|| circle_force_contour(r, BoundaryCondition::Dirichlet, black_box(0.3), 25.0, &cfg))
    });
}

criterion_group!(benches, forces);
criterion_main!(benches);
