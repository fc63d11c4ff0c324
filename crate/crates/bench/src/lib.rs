//! Fixtures shared by the benchmarks.

use piston_core::billiards::{analytic_spectrum, BoundaryCondition, Shape, Spectrum};

/// Unit-area square Dirichlet spectrum up to `lambda_max`.
pub fn square_spectrum(lambda_max: f64) -> Spectrum {
    analytic_spectrum(&Shape::unit_square(), BoundaryCondition::Dirichlet, lambda_max).expect("square spectrum")
}

/// Radius of the unit-area circle.
pub fn unit_circle_radius() -> f64 {
    match Shape::unit_circle() {
        Shape::Circle { radius } => radius,
        _ => unreachable!(),
    }
}
