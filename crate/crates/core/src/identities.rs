//! Integral and sum identities behind the orbit constants, checked numerically
//! at randomised parameters.

use crate::numerics::{integrate_adaptive, CompensatedSum};
use crate::specfun::{bessel_j, bessel_k1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Relative tolerance for the four asymptotic identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance for the exact hyperbolic closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// Outcome of one identity over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub samples: usize,
    pub worst_rel_error: f64,
    pub worst_params: String,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.worst_rel_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

/// `int_0^inf de sqrt(e) K1(2 l a sqrt(e)) J0(L sqrt(e))` by quadrature.
pub fn identity_i_integral(l: u32, a: f64, length: f64) -> f64 {
    let b = 2.0 * l as f64 * a;
    // e = x^2
    oscillatory_integral(|x| 2.0 * x * x * bessel_k1(b * x).unwrap_or(0.0) * bessel_j(0, length * x), b, length)
}

/// `l / (2 a^3 (l^2 + (L/2a)^2)^2)`.
pub fn identity_i_closed(l: u32, a: f64, length: f64) -> f64 {
    let l = l as f64;
    l / (2.0 * a.powi(3) * (l * l + (length / (2.0 * a)).powi(2)).powi(2))
}

/// `int_0^inf de K1(2 l a sqrt(e)) cos(R sqrt(e))` by quadrature.
pub fn identity_iii_integral(l: u32, a: f64, r: f64) -> f64 {
    let b = 2.0 * l as f64 * a;
    oscillatory_integral(|x| 2.0 * x * bessel_k1(b * x).unwrap_or(0.0) * (r * x).cos(), b, r)
}

/// `pi l / (4 a^2 (l^2 + (R/2a)^2)^{3/2})`.
pub fn identity_iii_closed(l: u32, a: f64, r: f64) -> f64 {
    let l = l as f64;
    PI * l / (4.0 * a * a * (l * l + (r / (2.0 * a)).powi(2)).powf(1.5))
}

/// `sum_{l >= 1} (l^2 + alpha^2)^{-p}` by direct summation to `terms` with an
/// Euler-Maclaurin tail.
pub fn direct_sum(alpha: f64, p: f64, terms: u64) -> f64 {
    let f = |x: f64| (x * x + alpha * alpha).powf(-p);
    let mut acc = CompensatedSum::new();
    for l in (1..=terms).rev() {
        acc.add(f(l as f64));
    }
    let n = terms as f64;
    let a2 = alpha * alpha;
    let tail_integral = if p == 2.0 {
        // int_n^inf (x^2 + a^2)^{-2} dx, with pi/2 - atan(n/a) = atan(a/n)
        ((alpha / n).atan() / alpha - n / (n * n + a2)) / (2.0 * a2)
    } else if p == 1.5 {
        (1.0 - n / (n * n + a2).sqrt()) / a2
    } else {
        integrate_adaptive(&|x: f64| f(n + x / (1.0 - x)) / (1.0 - x).powi(2), 0.0, 1.0, 1e-18)
    };
    let fprime = -2.0 * p * n * (n * n + a2).powf(-p - 1.0);
    acc.add(tail_integral - 0.5 * f(n) - fprime / 12.0);
    acc.value()
}

/// `pi / (4 alpha^3) - 1 / (2 alpha^4)`.
pub fn identity_ii_asymptotic(alpha: f64) -> f64 {
    PI / (4.0 * alpha.powi(3)) - 1.0 / (2.0 * alpha.powi(4))
}

/// Exact `sum_{l >= 1} (l^2 + alpha^2)^{-2}`:
/// `(2 pi^2 a^2 + 2 pi a sinh cosh - 4 sinh^2) / (8 a^4 sinh^2)` at `pi a`.
pub fn identity_ii_exact(alpha: f64) -> f64 {
    let x = PI * alpha;
    // Divide through by sinh^2 to stay finite for large alpha.
    let coth = 1.0 / x.tanh();
    let csch2 = 1.0 / x.sinh().powi(2);
    (2.0 * x * x * csch2 + 2.0 * x * coth - 4.0) / (8.0 * alpha.powi(4))
}

/// `1 / alpha^2 - 1 / (2 alpha^3)`.
pub fn identity_iv_asymptotic(alpha: f64) -> f64 {
    1.0 / (alpha * alpha) - 1.0 / (2.0 * alpha.powi(3))
}

/// Integrates a function decaying like `e^{-b x}` and oscillating with angular
/// frequency `c` over `[0, inf)`, panel by panel.
fn oscillatory_integral<F: Fn(f64) -> f64>(f: F, b: f64, c: f64) -> f64 {
    let width = PI / c.max(b);
    let end = 45.0 / b;
    let mut acc = CompensatedSum::new();
    let mut scale: f64 = 0.0;
    let mut lo = 0.0;
    while lo < end {
        let hi = lo + width;
        let tol = 1e-15 * scale.max(f(0.5 * width).abs() * width);
        let v = integrate_adaptive(&f, lo, hi, tol);
        scale = scale.max(v.abs());
        acc.add(v);
        lo = hi;
    }
    acc.value()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn record(check: &mut IdentityCheck, err: f64, params: String) {
    if err > check.worst_rel_error || check.samples == 0 {
        check.worst_rel_error = err.max(check.worst_rel_error);
        check.worst_params = params;
    }
    check.samples += 1;
}

fn new_check(name: &'static str, tolerance: f64) -> IdentityCheck {
    IdentityCheck { name, samples: 0, worst_rel_error: 0.0, worst_params: String::new(), tolerance }
}

/// Checks all identities at `samples` random parameter sets each (plus fixed
/// anchor points). The asymptotic sums use `alpha in [10, 40]`.
pub fn verify_identities(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = new_check("bessel_k1_j0_integral", IDENTITY_TOL);
    let mut ii = new_check("inverse_square_sum", IDENTITY_TOL);
    let mut iii = new_check("bessel_k1_cos_integral", IDENTITY_TOL);
    let mut iv = new_check("inverse_three_halves_sum", IDENTITY_TOL);
    let mut exact = new_check("inverse_square_sum_closed_form", CLOSED_FORM_TOL);

    let mut integral_params = vec![(1u32, 0.1, 2.0)];
    let mut alphas = vec![10.0, 20.0];
    let mut exact_alphas = vec![1.0];
    for _ in 0..samples {
        integral_params.push((rng.gen_range(1..=4), rng.gen_range(0.05..1.0), rng.gen_range(0.2..6.0)));
        alphas.push(rng.gen_range(10.0..40.0));
        exact_alphas.push(rng.gen_range(0.3..5.0));
    }
    for &(l, a, len) in &integral_params {
        let p = format!("l={l}, a={a:.6}, L={len:.6}");
        record(&mut i, rel(identity_i_integral(l, a, len), identity_i_closed(l, a, len)), p.clone());
        record(&mut iii, rel(identity_iii_integral(l, a, len), identity_iii_closed(l, a, len)), p);
    }
    for &alpha in &alphas {
        let p = format!("alpha={alpha:.6}");
        record(&mut ii, rel(direct_sum(alpha, 2.0, 100_000), identity_ii_asymptotic(alpha)), p.clone());
        record(&mut iv, rel(direct_sum(alpha, 1.5, 100_000), identity_iv_asymptotic(alpha)), p);
    }
    for &alpha in &exact_alphas {
        record(
            &mut exact,
            rel(identity_ii_exact(alpha), direct_sum(alpha, 2.0, 100_000)),
            format!("alpha={alpha:.6}"),
        );
    }
    IdentityReport { checks: vec![i, ii, iii, iv, exact] }
}
