//! Periodic-orbit lattice sums for the integrable cross-sections and the
//! resulting constant offsets of the force and energy.

use crate::billiards::{BoundaryCondition, Shape};
use crate::numerics::{zeta, CompensatedSum, GaussLegendre};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("no periodic-orbit lattice for {0}")]
    NoLattice(String),
    #[error("lattice sum with power {0} diverges (need p > 2)")]
    Divergent(f64),
    #[error("relative tolerance {0} is below the supported floor 1e-12")]
    ToleranceTooTight(f64),
    #[error("lattice sum did not reach tolerance {tol} by cutoff {cutoff}")]
    NotConverged { tol: f64, cutoff: u64 },
}

/// Lattice of closed orbits `M in Z^2 \ {0}` with lengths `L_M = sqrt(Q(M))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitLattice {
    /// `L_M = 2 sqrt((M1 lx)^2 + (M2 ly)^2)`.
    Rectangle { lx: f64, ly: f64 },
    /// `L_M = sqrt(3 (M1^2 + M2^2 + M1 M2)) side`.
    Triangle { side: f64 },
}

impl OrbitLattice {
    pub fn for_shape(shape: &Shape) -> Result<Self, OrbitError> {
        match *shape {
            Shape::Rectangle { lx, ly } => Ok(OrbitLattice::Rectangle { lx, ly }),
            Shape::EquilateralTriangle { side } => Ok(OrbitLattice::Triangle { side }),
            _ => Err(OrbitError::NoLattice(shape.describe())),
        }
    }

    /// Coefficients `(qxx, qxy, qyy)` of `L^2 = qxx x^2 + 2 qxy x y + qyy y^2`.
    fn quadratic_form(&self) -> (f64, f64, f64) {
        match *self {
            OrbitLattice::Rectangle { lx, ly } => (4.0 * lx * lx, 0.0, 4.0 * ly * ly),
            OrbitLattice::Triangle { side } => {
                let s2 = 3.0 * side * side;
                (s2, 0.5 * s2, s2)
            }
        }
    }

    pub fn length(&self, m1: i64, m2: i64) -> f64 {
        self.length_squared(m1, m2).sqrt()
    }

    pub fn length_squared(&self, m1: i64, m2: i64) -> f64 {
        let (a, b, c) = self.quadratic_form();
        let (x, y) = (m1 as f64, m2 as f64);
        a * x * x + 2.0 * b * x * y + c * y * y
    }
}

/// `q^{-p/2}` with fast paths for the powers used here.
fn inverse_power(q: f64, p: f64) -> f64 {
    if p == 3.0 {
        1.0 / (q * q.sqrt())
    } else if p == 4.0 {
        1.0 / (q * q)
    } else {
        q.powf(-0.5 * p)
    }
}

/// Result of a truncated lattice sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSum {
    /// Partial sum over `|M|_inf <= cutoff` plus the integral estimate of the rest.
    pub value: f64,
    /// The explicit partial sum alone.
    pub partial: f64,
    pub cutoff: u64,
    /// Bound on the error of `value`.
    pub tail_bound: f64,
}

/// `int_{|x|_inf > r} Q(x)^{-s} dA` for the lattice form, by polar integration
/// over the square boundary.
fn outside_square_integral(form: (f64, f64, f64), r: f64, s: f64) -> f64 {
    let (a, b, c) = form;
    let rule = GaussLegendre::new(48);
    let mut total = CompensatedSum::new();
    for k in 0..8 {
        let t0 = -PI / 4.0 + k as f64 * PI / 4.0;
        let t1 = t0 + PI / 4.0;
        total.add(rule.integrate(t0, t1, |t| {
            let (ct, st) = (t.cos(), t.sin());
            let q = a * ct * ct + 2.0 * b * ct * st + c * st * st;
            let rho = r / ct.abs().max(st.abs());
            q.powf(-s) * rho.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0)
        }));
    }
    total.value()
}

/// `sum_{M != 0} L_M^{-p}` by expanding square shells plus an integral tail.
///
/// The shells `|M|_inf <= K` are summed exactly; the remainder is replaced
/// by the integral of `L^{-p}` over `|x|_inf > K + 1/2` (the midpoint rule on
/// unit cells), whose error is bounded through the second derivatives of
/// `L^{-p}`. `K` doubles until the bound is below `rel_tol * value`.
pub fn lattice_sum(lattice: &OrbitLattice, p: f64, rel_tol: f64) -> Result<OrbitSum, OrbitError> {
    if p <= 2.0 {
        return Err(OrbitError::Divergent(p));
    }
    if rel_tol < 1e-12 {
        return Err(OrbitError::ToleranceTooTight(rel_tol));
    }
    let form = lattice.quadratic_form();
    let (a, b, c) = form;
    let s = 0.5 * p;
    let lam_max = 0.5 * (a + c) + (0.25 * (a - c).powi(2) + b * b).sqrt();
    let lam_min = 0.5 * (a + c) - (0.25 * (a - c).powi(2) + b * b).sqrt();
    let trace = a + c;
    // |d^2/dx^2 f| + |d^2/dy^2 f| <= deriv_const * Q^{-s-1} for f = Q^{-s}.
    let deriv_const = 4.0 * s * (s + 1.0) * lam_max * 2.0 + 2.0 * s * trace;
    let mut partial = CompensatedSum::new();
    let mut done: i64 = 0;
    let mut cutoff: i64 = 64;
    loop {
        for shell in (done + 1)..=cutoff {
            let mut acc = CompensatedSum::new();
            for m in -shell..shell {
                acc.add(inverse_power(lattice.length_squared(m, shell), p));
                acc.add(inverse_power(lattice.length_squared(-m, -shell), p));
                acc.add(inverse_power(lattice.length_squared(shell, -m), p));
                acc.add(inverse_power(lattice.length_squared(-shell, m), p));
            }
            partial.add(acc.value());
        }
        done = cutoff;
        let edge = cutoff as f64 + 0.5;
        let tail = outside_square_integral(form, edge, s);
        // Cells touch |x|_inf >= cutoff; widen the envelope accordingly.
        let inner = cutoff as f64;
        let stretch = (1.0 + 1.0 / inner).powf(2.0 * s + 2.0) * (lam_max / lam_min).sqrt();
        let bound = deriv_const / 24.0 * outside_square_integral(form, inner, s + 1.0) * stretch;
        let value = partial.value() + tail;
        if bound <= rel_tol * value {
            return Ok(OrbitSum { value, partial: partial.value(), cutoff: cutoff as u64, tail_bound: bound });
        }
        if cutoff >= 1 << 14 {
            return Err(OrbitError::NotConverged { tol: rel_tol, cutoff: cutoff as u64 });
        }
        cutoff *= 2;
    }
}

/// Plain partial sum over `|M|_inf <= cutoff`, without tail correction.
pub fn lattice_partial_sum(lattice: &OrbitLattice, p: f64, cutoff: u64) -> f64 {
    let k = cutoff as i64;
    let mut acc = CompensatedSum::new();
    for m1 in -k..=k {
        for m2 in -k..=k {
            if m1 != 0 || m2 != 0 {
                acc.add(inverse_power(lattice.length_squared(m1, m2), p));
            }
        }
    }
    acc.value()
}

/// Orbit sums `s3 = sum L^-3` and `s4 = sum L^-4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSums {
    pub s3: OrbitSum,
    pub s4: OrbitSum,
}

pub fn orbit_sums(lattice: &OrbitLattice, rel_tol: f64) -> Result<OrbitSums, OrbitError> {
    Ok(OrbitSums { s3: lattice_sum(lattice, 3.0, rel_tol)?, s4: lattice_sum(lattice, 4.0, rel_tol)? })
}

fn bc_sign(bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => 1.0,
        BoundaryCondition::Neumann => -1.0,
    }
}

/// Orbit and corner constants of the finite-size corrections for an integrable shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConstants {
    /// `a`-independent part of `delta_E`.
    pub energy_c0: f64,
    /// Coefficient of `a` in `delta_E`.
    pub energy_c1: f64,
    /// Constant limit of `delta_F` as `a -> 0`.
    pub force_offset: f64,
    pub sums: OrbitSums,
}

/// Lattice constants for the rectangle or the equilateral triangle.
pub fn orbit_constants(shape: &Shape, bc: BoundaryCondition) -> Result<OrbitConstants, OrbitError> {
    let lattice = OrbitLattice::for_shape(shape)?;
    let sums = orbit_sums(&lattice, 1e-10)?;
    let sign = bc_sign(bc);
    let z3 = zeta(3.0);
    let (c0, c1) = match *shape {
        Shape::Rectangle { lx, ly } => {
            let area = lx * ly;
            (
                -area / (8.0 * PI) * sums.s3.value + sign * PI / 96.0 * (1.0 / lx + 1.0 / ly),
                area / (2.0 * PI * PI) * sums.s4.value - sign * z3 / (32.0 * PI) * (1.0 / (lx * lx) + 1.0 / (ly * ly)),
            )
        }
        Shape::EquilateralTriangle { side } => {
            let l2 = side * side;
            (
                -3f64.sqrt() * l2 / (32.0 * PI) * sums.s3.value + sign * PI / (36.0 * side),
                3f64.sqrt() * l2 / (8.0 * PI * PI) * sums.s4.value - sign * z3 / (9.0 * PI * l2),
            )
        }
        _ => unreachable!("lattice exists only for rectangle and triangle"),
    };
    Ok(OrbitConstants { energy_c0: c0, energy_c1: c1, force_offset: -c1, sums })
}

/// `lim_{a -> 0} delta_F(a)` for an integrable shape.
pub fn delta_force_constant(shape: &Shape, bc: BoundaryCondition) -> Result<f64, OrbitError> {
    Ok(orbit_constants(shape, bc)?.force_offset)
}

/// `(c0, c1)` with `delta_E(a) -> c0 + c1 a` as `a -> 0`.
pub fn delta_energy_coeffs(shape: &Shape, bc: BoundaryCondition) -> Result<(f64, f64), OrbitError> {
    let k = orbit_constants(shape, bc)?;
    Ok((k.energy_c0, k.energy_c1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dirichlet_beta;

    #[test]
    fn square_s4_closed_form() {
        let lat = OrbitLattice::Rectangle { lx: 1.0, ly: 1.0 };
        let s4 = lattice_sum(&lat, 4.0, 1e-12).unwrap();
        let exact = 4.0 * zeta(2.0) * dirichlet_beta(2.0) / 16.0;
        assert!((s4.value - exact).abs() < 1e-11 * exact, "{} vs {exact}", s4.value);
        assert!(s4.tail_bound <= 1e-12 * s4.value);
    }

    #[test]
    fn s3_tail_bound_is_honest() {
        let lat = OrbitLattice::Rectangle { lx: 2.0, ly: 0.5 };
        let coarse = lattice_sum(&lat, 3.0, 1e-6).unwrap();
        let fine = lattice_sum(&lat, 3.0, 1e-10).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.tail_bound + fine.tail_bound);
    }

    #[test]
    fn triangle_lengths() {
        let lat = OrbitLattice::Triangle { side: 1.0 };
        assert!((lat.length(1, 0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((lat.length(1, -1) - 3f64.sqrt()).abs() < 1e-15);
        assert!((lat.length(1, 1) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_dirichlet_offset() {
        let k = delta_force_constant(&Shape::unit_square(), BoundaryCondition::Dirichlet).unwrap();
        let s4 = 4.0 * zeta(2.0) * dirichlet_beta(2.0) / 16.0;
        let expect = -s4 / (2.0 * PI * PI) + zeta(3.0) / (16.0 * PI);
        assert!((k - expect).abs() < 1e-12);
        assert!((k - 0.004_831).abs() < 1e-5);
    }

    #[test]
    fn curved_shapes_have_no_lattice() {
        assert!(OrbitLattice::for_shape(&Shape::unit_circle()).is_err());
    }

    #[test]
    fn rejects_divergent_power() {
        let lat = OrbitLattice::Rectangle { lx: 1.0, ly: 1.0 };
        assert_eq!(lattice_sum(&lat, 2.0, 1e-8), Err(OrbitError::Divergent(2.0)));
    }
}
