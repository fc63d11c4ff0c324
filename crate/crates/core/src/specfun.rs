//! Modified Bessel functions `K0`, `K1`, the force kernel, and integer-order
//! Bessel functions of the first kind together with their positive roots.

use std::f64::consts::PI;
use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("argument {0} outside the domain x > 0")]
    Domain(f64),
    #[error("failed to bracket root {index} of order {order} before x = {limit}")]
    RootBracket { order: u32, index: usize, limit: f64 },
}

/// Which function a root belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootKind {
    /// Zeros of `J_n`.
    Value,
    /// Positive zeros of `J_n'` (the trivial zero of `J_0'` at the origin is excluded).
    Derivative,
}

fn check_domain(x: f64) -> Result<(), SpecfunError> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(SpecfunError::Domain(x))
    }
}

/// `(K0(x), K1(x))` for `x > 0`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64), SpecfunError> {
    check_domain(x)?;
    if x.is_infinite() {
        return Ok((0.0, 0.0));
    }
    Ok(if x <= 2.0 { k01_series(x) } else { k01_continued_fraction(x) })
}

pub fn bessel_k0(x: f64) -> Result<f64, SpecfunError> {
    bessel_k01(x).map(|(k0, _)| k0)
}

pub fn bessel_k1(x: f64) -> Result<f64, SpecfunError> {
    bessel_k01(x).map(|(_, k1)| k1)
}

/// Derivative of `K1`: `K1'(x) = -K0(x) - K1(x)/x = -(K0(x) + K2(x))/2`.
pub fn kernel_k1prime(x: f64) -> Result<f64, SpecfunError> {
    let (k0, k1) = bessel_k01(x)?;
    Ok(-k0 - k1 / x)
}

fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        harmonic += 1.0 / k;
        i0 += term;
        i1 += term / (k + 1.0);
        tail += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail;
    let k1 = (1.0 / x - i1 * k0) / i0;
    (k0, k1)
}

/// Steed's continued fraction for `K_0` and `K_1`, accurate for `x >= 2`.
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `J_n(x)` for integer `n >= 0` and real `x`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let v = bessel_j_sequence(n, x.abs());
    let jn = v[n as usize];
    if x < 0.0 && n % 2 == 1 {
        -jn
    } else {
        jn
    }
}

/// `J_n'(x)` for integer `n >= 0` and `x >= 0`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    bessel_j_and_prime(n, x).1
}

/// `(J_n(x), J_n'(x))` for `x >= 0` from a single recurrence sweep.
pub fn bessel_j_and_prime(n: u32, x: f64) -> (f64, f64) {
    let v = bessel_j_sequence(n + 1, x);
    let i = n as usize;
    let d = if n == 0 { -v[1] } else { 0.5 * (v[i - 1] - v[i + 1]) };
    (v[i], d)
}

/// `J_0(x), ..., J_nmax(x)` for `x >= 0`.
///
/// Upward recurrence from the Hankel expansion when `nmax < x` and `x` is
/// large; otherwise Miller's downward recurrence normalised by
/// `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j_sequence(nmax: u32, x: f64) -> Vec<f64> {
    let nmax = nmax as usize;
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x >= 25.0 && (nmax as f64) < x {
        out[0] = hankel_j(0, x);
        if nmax >= 1 {
            out[1] = hankel_j(1, x);
        }
        for k in 1..nmax {
            out[k + 1] = 2.0 * k as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    miller(nmax, x, &mut out);
    out
}

fn miller(nmax: usize, x: f64, out: &mut [f64]) {
    let top = (nmax as f64).max(x);
    let mut m = (top + (160.0 * top).sqrt() + 20.0).ceil() as usize;
    m += m % 2;
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_{k-1}
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut().skip(idx) {
                *v *= s;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
}

fn hankel_j(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    let mut k = 0u32;
    loop {
        let t = term.abs();
        if t > last || k > 200 {
            break;
        }
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if t < 1e-18 {
            break;
        }
        last = t;
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
        k += 1;
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// McMahon's large-root expansion of the `m`-th positive root (1-based).
pub fn mcmahon_estimate(n: u32, m: usize, kind: RootKind) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    match kind {
        RootKind::Value => {
            let b = (m as f64 + 0.5 * n as f64 - 0.25) * PI;
            let e = 8.0 * b;
            b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        }
        RootKind::Derivative => {
            let m = if n == 0 { m + 1 } else { m };
            let b = (m as f64 + 0.5 * n as f64 - 0.75) * PI;
            let e = 8.0 * b;
            b - (mu + 3.0) / e - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (3.0 * e.powi(3))
        }
    }
}

fn root_function(n: u32, x: f64, kind: RootKind) -> (f64, f64) {
    match kind {
        RootKind::Value => bessel_j_and_prime(n, x),
        RootKind::Derivative => {
            let (j, jp) = bessel_j_and_prime(n, x);
            let nf = n as f64;
            let jpp = -jp / x - (1.0 - nf * nf / (x * x)) * j;
            (jp, jpp)
        }
    }
}

const SCAN_STEP: f64 = 0.5;

fn scan_start(n: u32, kind: RootKind) -> f64 {
    match (kind, n) {
        (RootKind::Derivative, 0) => SCAN_STEP,
        _ => (n as f64).max(SCAN_STEP * 0.5),
    }
}

fn polish(n: u32, kind: RootKind, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = root_function(n, lo, kind).0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = root_function(n, x, kind);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// Positive roots of `J_n` or `J_n'` in increasing order, up to and including `xmax`.
///
/// Roots are bracketed by a scan whose step is below the minimal root spacing,
/// then refined by safeguarded Newton iteration.
pub fn bessel_roots_below(n: u32, xmax: f64, kind: RootKind) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut a = scan_start(n, kind);
    if a > xmax {
        return roots;
    }
    let mut fa = root_function(n, a, kind).0;
    loop {
        let b = a + SCAN_STEP;
        let fb = root_function(n, b, kind).0;
        if fa == 0.0 {
            roots.push(a);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            let r = polish(n, kind, a, b);
            if r <= xmax {
                roots.push(r);
            }
        }
        if b > xmax {
            break;
        }
        a = b;
        fa = fb;
    }
    roots
}

/// The first `count` positive roots of `J_n` or `J_n'`.
pub fn bessel_roots(n: u32, count: usize, kind: RootKind) -> Result<Vec<f64>, SpecfunError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let limit = mcmahon_estimate(n, count, kind).max(n as f64) + 2.0 * PI + 10.0;
    let mut roots = bessel_roots_below(n, limit, kind);
    if roots.len() < count {
        return Err(SpecfunError::RootBracket { order: n, index: roots.len() + 1, limit });
    }
    roots.truncate(count);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_adaptive;

    fn k_integral(nu: f64, x: f64) -> f64 {
        let tmax = (2.0 * 50.0 / x + 2.0).ln() + 2.0;
        let f = |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        integrate_adaptive(&f, 0.0, tmax, 1e-16) * (-x).exp()
    }

    fn j_integral(n: u32, x: f64) -> f64 {
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        integrate_adaptive(&f, 0.0, PI, 1e-15) / PI
    }

    #[test]
    fn k_matches_integral_representation() {
        for &x in &[0.01, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 3.7, 8.0, 20.0, 60.0] {
            let (k0, k1) = bessel_k01(x).unwrap();
            let r0 = k_integral(0.0, x);
            let r1 = k_integral(1.0, x);
            assert!((k0 - r0).abs() <= 1e-13 * r0, "K0({x}) = {k0} vs {r0}");
            assert!((k1 - r1).abs() <= 1e-13 * r1, "K1({x}) = {k1} vs {r1}");
        }
    }

    #[test]
    fn k_reference_values() {
        let (k0, k1) = bessel_k01(1.0).unwrap();
        assert!((k0 - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k1 - 0.601_907_230_197_234_6).abs() < 1e-15);
        assert!((kernel_k1prime(1.0).unwrap() + 1.022_931_668_437_942).abs() < 1e-13);
    }

    #[test]
    fn k_domain_and_underflow() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(kernel_k1prime(f64::NAN).is_err());
        assert_eq!(bessel_k0(1e4).unwrap(), 0.0);
    }

    #[test]
    fn kernel_is_derivative_of_k1() {
        for &x in &[0.3, 1.0, 2.5, 7.0] {
            let h = 1e-5 * x;
            let fd = (bessel_k1(x + h).unwrap() - bessel_k1(x - h).unwrap()) / (2.0 * h);
            assert!((kernel_k1prime(x).unwrap() - fd).abs() < 1e-8 * fd.abs());
        }
    }

    #[test]
    fn j_matches_integral_representation() {
        for &n in &[0u32, 1, 2, 5, 17, 40] {
            for &x in &[0.3, 1.0, 4.0, 12.5, 24.9, 25.1, 33.0, 70.0] {
                let v = bessel_j(n, x);
                let r = j_integral(n, x);
                assert!((v - r).abs() < 1e-13, "J_{n}({x}) = {v} vs {r}");
            }
        }
    }

    #[test]
    fn j_reflection_and_origin() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
        assert!((bessel_j(3, -2.0) + bessel_j(3, 2.0)).abs() < 1e-16);
    }

    #[test]
    fn known_roots() {
        let j0 = bessel_roots(0, 3, RootKind::Value).unwrap();
        assert!((j0[0] - 2.404_825_557_695_773).abs() < 1e-13);
        assert!((j0[2] - 8.653_727_912_911_013).abs() < 1e-13);
        let j2 = bessel_roots(2, 1, RootKind::Value).unwrap();
        assert!((j2[0] - 5.135_622_301_840_683).abs() < 1e-13);
        let d1 = bessel_roots(1, 1, RootKind::Derivative).unwrap();
        assert!((d1[0] - 1.841_183_781_340_659).abs() < 1e-13);
        let d0 = bessel_roots(0, 1, RootKind::Derivative).unwrap();
        assert!((d0[0] - 3.831_705_970_207_512).abs() < 1e-13);
    }

    #[test]
    fn roots_approach_mcmahon() {
        for kind in [RootKind::Value, RootKind::Derivative] {
            let r = bessel_roots(3, 60, kind).unwrap();
            let err_first = (r[9] - mcmahon_estimate(3, 10, kind)).abs();
            let err_last = (r[59] - mcmahon_estimate(3, 60, kind)).abs();
            assert!(err_last < err_first);
            assert!(err_last < 5e-9);
        }
    }

    #[test]
    fn roots_are_zeros() {
        for &n in &[0u32, 7, 80] {
            for r in bessel_roots_below(n, 200.0, RootKind::Value) {
                assert!(bessel_j(n, r).abs() < 5e-14, "{n} {r} {}", bessel_j(n, r));
            }
            for r in bessel_roots_below(n, 200.0, RootKind::Derivative) {
                assert!(bessel_j_prime(n, r).abs() < 5e-14, "{n} {r} {}", bessel_j_prime(n, r));
            }
        }
    }
}
