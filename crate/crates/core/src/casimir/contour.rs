//! Summation over Bessel-defined spectra by the argument principle.
//!
//! For `f(z) = J_n(R z)` or `J'_n(R z)` the sum of `z^2 K1'(2 z l a)` over the
//! zeros of `f` enclosed by a contour equals
//! `(1/2 pi i) \oint z^2 K1'(2 z l a) f'(z)/f(z) dz`. The contour is the
//! rectangle with corners `(delta, -h)`, `(z_max, -h)`, `(z_max, h)`,
//! `(delta, h)`, where `delta` is half the first zero and `h = 1/(l a)`, so
//! that `|Im(2 z l a)| <= 2`.

use super::CasimirError;
use crate::billiards::BoundaryCondition;
use crate::numerics::{gl20, CompensatedSum};
use crate::specfun::{bessel_roots, RootKind};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("contour passes within {distance:.3e} of a zero near z = {z}; re-route the contour")]
    NearZero { z: f64, distance: f64 },
    #[error("contour quadrature did not converge on side {side} (depth limit {depth})")]
    NotConverged { side: usize, depth: u32 },
    #[error("invalid contour parameters: {0}")]
    InvalidParameters(String),
}

/// The function whose zeros define the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesselContour {
    /// Zeros of `J_n(R z)`.
    Value { order: u32, radius: f64 },
    /// Nonzero zeros of `J'_n(R z)`.
    Derivative { order: u32, radius: f64 },
}

impl BesselContour {
    pub fn for_bc(bc: BoundaryCondition, order: u32, radius: f64) -> Self {
        match bc {
            BoundaryCondition::Dirichlet => BesselContour::Value { order, radius },
            BoundaryCondition::Neumann => BesselContour::Derivative { order, radius },
        }
    }

    fn order(&self) -> u32 {
        match *self {
            BesselContour::Value { order, .. } | BesselContour::Derivative { order, .. } => order,
        }
    }

    fn radius(&self) -> f64 {
        match *self {
            BesselContour::Value { radius, .. } | BesselContour::Derivative { radius, .. } => radius,
        }
    }

    fn kind(&self) -> RootKind {
        match self {
            BesselContour::Value { .. } => RootKind::Value,
            BesselContour::Derivative { .. } => RootKind::Derivative,
        }
    }

    /// Smallest positive zero of `f`.
    pub fn first_zero(&self) -> Result<f64, CasimirError> {
        let roots = bessel_roots(self.order(), 1, self.kind())?;
        Ok(roots[0] / self.radius())
    }

    /// `f'(z) / f(z)`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        let n = self.order();
        let r = self.radius();
        let w = z * r;
        let q = Complex64::new(n as f64, 0.0) / w - j_ratio(n, w);
        match self {
            BesselContour::Value { .. } => q * r,
            BesselContour::Derivative { .. } => {
                let nn = (n * n) as f64;
                (-w.inv() - (Complex64::new(1.0, 0.0) - nn / (w * w)) / q) * r
            }
        }
    }
}

/// `J_{n+1}(w) / J_n(w)` by backward recurrence of the continued fraction.
fn j_ratio(n: u32, w: Complex64) -> Complex64 {
    let top = n as usize + w.norm().ceil() as usize + 60;
    let mut r = Complex64::new(0.0, 0.0);
    for k in (n as usize..top).rev() {
        r = (Complex64::new(2.0 * (k as f64 + 1.0), 0.0) / w - r).inv();
    }
    r
}

/// `(K0(x), K1(x))` for complex `x` with `Re x > 0`.
pub fn complex_bessel_k01(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() <= 2.0 {
        k01_series(x)
    } else {
        k01_continued_fraction(x)
    }
}

/// `K1'(x) = -K0(x) - K1(x)/x` for complex `x`.
pub fn complex_kernel_k1prime(x: Complex64) -> Complex64 {
    let (k0, k1) = complex_bessel_k01(x);
    -k0 - k1 / x
}

fn k01_series(x: Complex64) -> (Complex64, Complex64) {
    let y = x * x * 0.25;
    let ln = (x * 0.5).ln();
    let one = Complex64::new(1.0, 0.0);
    // psi(k+1) and psi(k+2)
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut t0 = one; // y^k / (k!)^2
    let mut t1 = one; // y^k / (k! (k+1)!)
    let mut i0 = Complex64::new(0.0, 0.0);
    let mut i1 = Complex64::new(0.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    for k in 0..60 {
        i0 += t0;
        i1 += t1;
        s0 += t0 * psi1;
        s1 += t1 * (psi1 + psi2);
        let kf = k as f64;
        t0 = t0 * y / ((kf + 1.0) * (kf + 1.0));
        t1 = t1 * y / ((kf + 1.0) * (kf + 2.0));
        psi1 += 1.0 / (kf + 1.0);
        psi2 += 1.0 / (kf + 2.0);
        if t0.norm() < 1e-18 * i0.norm() && t1.norm() < 1e-18 * i1.norm() {
            break;
        }
    }
    let k0 = -ln * i0 + s0;
    let k1 = x.inv() + ln * (x * 0.5) * i1 - x * 0.25 * s1;
    (k0, k1)
}

fn k01_continued_fraction(x: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + x) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i as f64 - 1.0);
        c = c * (-a / i as f64);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    let k0 = (Complex64::new(PI, 0.0) / (x * 2.0)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h * a1) / x;
    (k0, k1)
}

/// Quadrature settings for [`contour_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Relative tolerance against the integral of `|integrand|` along the contour.
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Minimum allowed distance between a contour crossing and a zero.
    pub zero_clearance: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-13, max_depth: 30, zero_clearance: 1e-6 }
    }
}

/// `sum_{zeros delta < z_k < z_max} z_k^2 K1'(2 z_k l a)` by contour integration.
pub fn contour_sum(
    f: BesselContour,
    a: f64,
    l: u32,
    z_max: f64,
    cfg: &ContourConfig,
) -> Result<f64, CasimirError> {
    if !(a > 0.0 && l >= 1 && z_max.is_finite() && f.radius() > 0.0) {
        return Err(ContourError::InvalidParameters(format!("a = {a}, l = {l}, z_max = {z_max}")).into());
    }
    let delta = 0.5 * f.first_zero()?;
    if z_max <= delta {
        return Ok(0.0);
    }
    let la = l as f64 * a;
    let h = 1.0 / la;
    for &z in &[delta, z_max] {
        let dist = 1.0 / f.log_derivative(Complex64::new(z, 0.0)).norm();
        if dist < cfg.zero_clearance {
            return Err(ContourError::NearZero { z, distance: dist }.into());
        }
    }
    let integrand = |z: Complex64| -> Complex64 {
        z * z * complex_kernel_k1prime(z * (2.0 * la)) * f.log_derivative(z)
    };
    let corners = [
        Complex64::new(delta, -h),
        Complex64::new(z_max, -h),
        Complex64::new(z_max, h),
        Complex64::new(delta, h),
    ];
    // Scale for the tolerance from a coarse pass.
    let mut scale = 0.0;
    for side in 0..4 {
        let (p, q) = (corners[side], corners[(side + 1) % 4]);
        scale += panel(&integrand, p, q).1;
    }
    let tol = cfg.rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut total = Complex64::new(0.0, 0.0);
    for side in 0..4 {
        let (p, q) = (corners[side], corners[(side + 1) % 4]);
        let whole = panel(&integrand, p, q);
        total += adaptive(&integrand, p, q, whole, 0.25 * tol, 0, cfg.max_depth)
            .ok_or(ContourError::NotConverged { side, depth: cfg.max_depth })?;
    }
    // (1/2 pi i) * total
    Ok(total.im / (2.0 * PI))
}

/// Segment integral `(value, sum |w f| |dz|)` with the 20-point rule.
fn panel<F: Fn(Complex64) -> Complex64>(f: &F, p: Complex64, q: Complex64) -> (Complex64, f64) {
    let rule = gl20();
    let half = (q - p) * 0.5;
    let mid = (q + p) * 0.5;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut abs = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * *x) * half * *w;
        re.add(v.re);
        im.add(v.im);
        abs += v.norm();
    }
    (Complex64::new(re.value(), im.value()), abs)
}

fn adaptive<F: Fn(Complex64) -> Complex64>(
    f: &F,
    p: Complex64,
    q: Complex64,
    whole: (Complex64, f64),
    tol: f64,
    depth: u32,
    max_depth: u32,
) -> Option<Complex64> {
    let m = (p + q) * 0.5;
    let left = panel(f, p, m);
    let right = panel(f, m, q);
    let refined = left.0 + right.0;
    let floor = 64.0 * f64::EPSILON * (left.1 + right.1);
    if (refined - whole.0).norm() <= tol.max(floor) {
        return Some(refined);
    }
    if depth >= max_depth {
        return None;
    }
    Some(
        adaptive(f, p, m, left, 0.5 * tol, depth + 1, max_depth)?
            + adaptive(f, m, q, right, 0.5 * tol, depth + 1, max_depth)?,
    )
}

/// Circle piston force summed order by order and winding by winding through
/// [`contour_sum`], with the same truncation `2 l lambda a <= D` as the direct sum.
pub fn circle_force_contour(
    radius: f64,
    bc: BoundaryCondition,
    a: f64,
    accuracy_exponent: f64,
    cfg: &ContourConfig,
) -> Result<f64, CasimirError> {
    let mut acc = CompensatedSum::new();
    let mut l = 1u32;
    loop {
        let z_max = accuracy_exponent / (2.0 * l as f64 * a);
        let mut n = 0u32;
        let mut any = false;
        loop {
            let f = BesselContour::for_bc(bc, n, radius);
            if f.first_zero()? > z_max {
                // First zeros increase with the order from n = 1 on; J'_0 is
                // the exception.
                if n == 0 {
                    n = 1;
                    continue;
                }
                break;
            }
            any = true;
            let mult = if n == 0 { 1.0 } else { 2.0 };
            acc.add(mult * contour_sum(f, a, l, z_max, cfg)?);
            n += 1;
        }
        if !any {
            break;
        }
        l += 1;
    }
    Ok(acc.value() / PI)
}
