//! Casimir piston forces from a cross-section spectrum.
//!
//! Forces are per unit of the `a`-independent normalisation used throughout:
//! `F(a) = (1/pi) sum_k mult_k sum_l lambda_k^2 K1'(2 l lambda_k a)`, with every
//! term whose argument `2 l lambda a` exceeds the accuracy exponent `D` dropped.

pub mod contour;
pub mod transition;

use crate::billiards::{BoundaryCondition, Spectrum, WeylData};
use crate::numerics::{format_sci, zeta, CompensatedSum};
use crate::specfun::{bessel_k1, kernel_k1prime, SpecfunError};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

pub use contour::{circle_force_contour, contour_sum, BesselContour, ContourConfig, ContourError};
pub use transition::{jump_statistic, plateau_family, plateau_fit, transition_limit_u, PlateauFit, TransitionPoint, FLATNESS_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasimirError {
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
    #[error("spectrum complete only to lambda = {have}; the policy needs lambda_max >= {need}")]
    SpectrumTooShort { have: f64, need: f64 },
    #[error("separation a = {a} is below the certified a_min = {a_min}")]
    BelowAMin { a: f64, a_min: f64 },
    #[error("expected a {expected} spectrum, got {found}")]
    WrongBoundaryCondition { expected: BoundaryCondition, found: BoundaryCondition },
    #[error("far asymptote of order {order} needs {order} levels, spectrum has {available}")]
    NotEnoughLevels { order: usize, available: usize },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Contour(#[from] ContourError),
}

/// Truncation of the double sum over levels and windings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Terms with `2 l lambda a > D` are dropped; at short distances the relative error is of order `D^{5/2} e^{-D}`.
    pub accuracy_exponent: f64,
    /// Smallest separation the policy certifies.
    pub a_min: f64,
}

impl TruncationPolicy {
    pub const DEFAULT_ACCURACY_EXPONENT: f64 = 25.0;

    pub fn new(accuracy_exponent: f64, a_min: f64) -> Result<Self, CasimirError> {
        if !(accuracy_exponent.is_finite() && accuracy_exponent > 0.0) {
            return Err(CasimirError::InvalidPolicy(format!("D = {accuracy_exponent}")));
        }
        if !(a_min.is_finite() && a_min > 0.0) {
            return Err(CasimirError::InvalidPolicy(format!("a_min = {a_min}")));
        }
        Ok(Self { accuracy_exponent, a_min })
    }

    /// Policy whose `a_min` is the smallest separation a spectrum complete to
    /// `lambda_max` supports.
    pub fn for_spectrum_bound(accuracy_exponent: f64, lambda_max: f64) -> Result<Self, CasimirError> {
        Self::new(accuracy_exponent, accuracy_exponent / (2.0 * lambda_max))
    }

    /// `D / (2 a_min)`.
    pub fn required_lambda_max(&self) -> f64 {
        self.accuracy_exponent / (2.0 * self.a_min)
    }

    /// Largest winding number kept for a level at separation `a`.
    pub fn l_max(&self, lambda: f64, a: f64) -> u64 {
        winding_cutoff(lambda, a, self.accuracy_exponent)
    }

    pub fn check(&self, spectrum: &Spectrum, a: f64) -> Result<(), CasimirError> {
        let need = self.required_lambda_max();
        if spectrum.lambda_max() < need * (1.0 - 1e-12) {
            return Err(CasimirError::SpectrumTooShort { have: spectrum.lambda_max(), need });
        }
        if !(a >= self.a_min * (1.0 - 1e-12)) {
            return Err(CasimirError::BelowAMin { a, a_min: self.a_min });
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { accuracy_exponent: Self::DEFAULT_ACCURACY_EXPONENT, a_min: 0.05 }
    }
}

fn winding_cutoff(lambda: f64, a: f64, d: f64) -> u64 {
    (d / (2.0 * lambda * a)).floor() as u64
}

/// Which electromagnetic modes a force refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeContent {
    Tm,
    Te,
    TmTe,
}

impl ModeContent {
    pub fn tag(self) -> &'static str {
        match self {
            ModeContent::Tm => "TM",
            ModeContent::Te => "TE",
            ModeContent::TmTe => "TM+TE",
        }
    }
}

/// `(1/pi) sum_l lambda^2 K1'(2 l lambda a)` over `2 l lambda a <= D`.
pub fn single_level_force(lambda: f64, a: f64, d: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for l in 1..=winding_cutoff(lambda, a, d) {
        let x = 2.0 * l as f64 * lambda * a;
        acc.add(kernel_k1prime(x).unwrap_or(0.0));
    }
    lambda * lambda * acc.value() / PI
}

/// Energy of a massive scalar on an interval of length `a` in one dimension:
/// `-(1/2pi) sum_l m K1(2 l m a) / l`.
pub fn massive_energy_1d(m: f64, a: f64, d: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for l in 1..=winding_cutoff(m, a, d).max(1) {
        let x = 2.0 * l as f64 * m * a;
        acc.add(bessel_k1(x).unwrap_or(0.0) / l as f64);
    }
    -m * acc.value() / (2.0 * PI)
}

/// `-dE/da` of [`massive_energy_1d`]: `(1/pi) sum_l m^2 K1'(2 l m a)`.
pub fn massive_force_1d(m: f64, a: f64, d: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for l in 1..=winding_cutoff(m, a, d).max(1) {
        let x = 2.0 * l as f64 * m * a;
        acc.add(kernel_k1prime(x).unwrap_or(0.0));
    }
    m * m * acc.value() / PI
}

/// Exact piston force for one spectrum (TM for Dirichlet, TE for Neumann).
///
/// Levels are visited in ascending order and accumulated with compensated
/// summation.
pub fn piston_force(spectrum: &Spectrum, a: f64, policy: &TruncationPolicy) -> Result<f64, CasimirError> {
    policy.check(spectrum, a)?;
    Ok(force_unchecked(spectrum, a, policy.accuracy_exponent))
}

fn force_unchecked(spectrum: &Spectrum, a: f64, d: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for level in spectrum.levels() {
        let lambda = level.lambda;
        let lmax = winding_cutoff(lambda, a, d);
        if lmax == 0 {
            break;
        }
        let mut inner = CompensatedSum::new();
        for l in 1..=lmax {
            inner.add(kernel_k1prime(2.0 * l as f64 * lambda * a).unwrap_or(0.0));
        }
        acc.add(level.multiplicity as f64 * lambda * lambda * inner.value());
    }
    acc.value() / PI
}

/// Full electromagnetic force: Dirichlet (TM) plus Neumann (TE) contributions.
pub fn piston_force_em(
    dirichlet: &Spectrum,
    neumann: &Spectrum,
    a: f64,
    policy: &TruncationPolicy,
) -> Result<f64, CasimirError> {
    expect_bc(dirichlet, BoundaryCondition::Dirichlet)?;
    expect_bc(neumann, BoundaryCondition::Neumann)?;
    Ok(piston_force(dirichlet, a, policy)? + piston_force(neumann, a, policy)?)
}

fn expect_bc(s: &Spectrum, expected: BoundaryCondition) -> Result<(), CasimirError> {
    if s.bc() == expected {
        Ok(())
    } else {
        Err(CasimirError::WrongBoundaryCondition { expected, found: s.bc() })
    }
}

/// Coefficients of the Weyl force `F_W = area/a^4 + perimeter/a^3 + chi/a^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylTerms {
    pub area: f64,
    pub perimeter: f64,
    pub chi: f64,
}

impl WeylTerms {
    pub fn from_weyl(weyl: &WeylData) -> Self {
        Self {
            area: -3.0 * zeta(4.0) * weyl.area / (16.0 * PI * PI),
            perimeter: -zeta(3.0) * weyl.signed_perimeter() / (32.0 * PI),
            chi: -zeta(2.0) * weyl.constant() / (4.0 * PI),
        }
    }

    /// Sum of the first `terms` (1 to 3) contributions at separation `a`.
    pub fn evaluate(&self, a: f64, terms: usize) -> f64 {
        let parts = [self.area / a.powi(4), self.perimeter / a.powi(3), self.chi / (a * a)];
        parts.iter().take(terms.clamp(1, 3)).sum()
    }
}

/// The Weyl (short-distance) force with all three terms.
pub fn weyl_force(weyl: &WeylData, a: f64) -> f64 {
    WeylTerms::from_weyl(weyl).evaluate(a, 3)
}

/// Short- and long-distance asymptotic data of one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteSet {
    pub weyl_terms: WeylTerms,
    /// Lowest distinct levels `(lambda, multiplicity)` for the far asymptote.
    pub far_params: Vec<(f64, u32)>,
}

impl AsymptoteSet {
    pub fn new(spectrum: &Spectrum, weyl: &WeylData, orders: usize) -> Self {
        Self {
            weyl_terms: WeylTerms::from_weyl(weyl),
            far_params: spectrum.levels().iter().take(orders).map(|l| (l.lambda, l.multiplicity)).collect(),
        }
    }

    /// Asymptotes of the sum of two forces, e.g. TM plus TE.
    pub fn combined(&self, other: &AsymptoteSet) -> Self {
        let mut far_params: Vec<(f64, u32)> = self.far_params.iter().chain(&other.far_params).copied().collect();
        far_params.sort_by(|x, y| x.0.total_cmp(&y.0));
        far_params.truncate(self.far_params.len().max(other.far_params.len()));
        let (a, b) = (self.weyl_terms, other.weyl_terms);
        Self {
            weyl_terms: WeylTerms { area: a.area + b.area, perimeter: a.perimeter + b.perimeter, chi: a.chi + b.chi },
            far_params,
        }
    }

    /// Far asymptote from the lowest `order` stored levels, winding `l = 1` only.
    pub fn far(&self, a: f64, order: usize) -> f64 {
        let sum: f64 = self
            .far_params
            .iter()
            .take(order)
            .map(|&(lambda, m)| m as f64 * lambda * lambda * kernel_k1prime(2.0 * lambda * a).unwrap_or(0.0))
            .sum();
        sum / PI
    }
}

/// Long-distance force from the lowest `order` distinct levels, winding `l = 1` only.
pub fn far_asymptote(spectrum: &Spectrum, a: f64, order: usize) -> Result<f64, CasimirError> {
    let available = spectrum.levels().len();
    if order == 0 || order > available {
        return Err(CasimirError::NotEnoughLevels { order, available });
    }
    let mut acc = CompensatedSum::new();
    for level in &spectrum.levels()[..order] {
        let lambda = level.lambda;
        acc.add(level.multiplicity as f64 * lambda * lambda * kernel_k1prime(2.0 * lambda * a)?);
    }
    Ok(acc.value() / PI)
}

/// Leading exponential form of the single-level far force:
/// `-mult (lambda^3 / pi a)^{1/2} e^{-2 lambda a} / 2`.
pub fn far_asymptote_exponential(lambda: f64, multiplicity: u32, a: f64) -> f64 {
    -0.5 * multiplicity as f64 * (lambda.powi(3) / (PI * a)).sqrt() * (-2.0 * lambda * a).exp()
}

/// `F - F_W` at one separation.
pub fn delta_force(
    spectrum: &Spectrum,
    weyl: &WeylData,
    a: f64,
    policy: &TruncationPolicy,
) -> Result<f64, CasimirError> {
    Ok(piston_force(spectrum, a, policy)? - weyl_force(weyl, a))
}

/// One sample of a force curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcePoint {
    pub a: f64,
    pub force: f64,
    pub weyl: f64,
}

impl ForcePoint {
    pub fn delta(&self) -> f64 {
        self.force - self.weyl
    }
}

/// Force as a function of separation on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceCurve {
    pub points: Vec<ForcePoint>,
    pub content: ModeContent,
    pub spectrum_id: String,
    pub policy: TruncationPolicy,
}

impl ForceCurve {
    /// Writes the curve as CSV: `# key=value` metadata lines, the header
    /// `a,F,F_weyl,delta_F,a_delta_F` and one row per separation in `%.10e`
    /// format. With `overlay`, columns `F_far1..F_far4` and `F_weyl1..F_weyl3`
    /// are appended.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        metadata: &[(&str, String)],
        overlay: Option<&AsymptoteSet>,
    ) -> std::io::Result<()> {
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "# content={}", self.content.tag())?;
        writeln!(w, "# spectrum={}", self.spectrum_id)?;
        writeln!(w, "# D={}", self.policy.accuracy_exponent)?;
        writeln!(w, "# a_min={}", self.policy.a_min)?;
        write!(w, "a,F,F_weyl,delta_F,a_delta_F")?;
        if overlay.is_some() {
            write!(w, ",F_far1,F_far2,F_far3,F_far4,F_weyl1,F_weyl2,F_weyl3")?;
        }
        writeln!(w)?;
        let f = |x: f64| format_sci(x, 10);
        for p in &self.points {
            let d = p.delta();
            write!(w, "{},{},{},{},{}", f(p.a), f(p.force), f(p.weyl), f(d), f(p.a * d))?;
            if let Some(o) = overlay {
                for order in 1..=4 {
                    write!(w, ",{}", f(o.far(p.a, order)))?;
                }
                for terms in 1..=3 {
                    write!(w, ",{}", f(o.weyl_terms.evaluate(p.a, terms)))?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Spectra entering a force curve.
#[derive(Debug, Clone, Copy)]
pub enum ForceSource<'a> {
    Single { spectrum: &'a Spectrum, weyl: &'a WeylData },
    Electromagnetic { dirichlet: &'a Spectrum, neumann: &'a Spectrum, weyl_d: &'a WeylData, weyl_n: &'a WeylData },
}

impl ForceSource<'_> {
    pub fn content(&self) -> ModeContent {
        match self {
            ForceSource::Single { spectrum, .. } => match spectrum.bc() {
                BoundaryCondition::Dirichlet => ModeContent::Tm,
                BoundaryCondition::Neumann => ModeContent::Te,
            },
            ForceSource::Electromagnetic { .. } => ModeContent::TmTe,
        }
    }

    fn point(&self, a: f64, policy: &TruncationPolicy) -> Result<ForcePoint, CasimirError> {
        match *self {
            ForceSource::Single { spectrum, weyl } => {
                Ok(ForcePoint { a, force: piston_force(spectrum, a, policy)?, weyl: weyl_force(weyl, a) })
            }
            ForceSource::Electromagnetic { dirichlet, neumann, weyl_d, weyl_n } => Ok(ForcePoint {
                a,
                force: piston_force_em(dirichlet, neumann, a, policy)?,
                weyl: weyl_force(weyl_d, a) + weyl_force(weyl_n, a),
            }),
        }
    }
}

/// Evaluates the force on every grid point in parallel. Each point is computed
/// independently and sequentially, so the result does not depend on the
/// number of worker threads.
pub fn force_curve(
    source: ForceSource<'_>,
    grid: &[f64],
    policy: &TruncationPolicy,
    spectrum_id: &str,
) -> Result<ForceCurve, CasimirError> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points = sorted
        .par_iter()
        .map(|&a| source.point(a, policy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForceCurve { points, content: source.content(), spectrum_id: spectrum_id.to_string(), policy: *policy })
}

/// Outcome of the short-distance consistency check `a^2 delta_F -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardReport {
    /// `|a^2 delta_F|` at the smallest separation.
    pub at_smallest: f64,
    /// `|a^2 delta_F|` one decade above the smallest separation.
    pub at_decade_top: f64,
    /// Limit of `a^2 delta_F` for a single missing level, for comparison.
    pub missing_level_signature: f64,
    pub violated: bool,
}

/// `a^2 F` of one level as `a -> 0`: `-zeta(2)/(4 pi) = -pi/24`.
pub const MISSING_LEVEL_A2_LIMIT: f64 = -PI / 24.0;

/// Checks that `|a^2 delta_F|` decreases towards small `a` over the smallest
/// decade of the curve; it is violated when the value at the smallest `a` is
/// not below the value at the top of that decade.
pub fn eq16_guard(curve: &ForceCurve) -> Option<GuardReport> {
    let first = curve.points.first()?;
    let top_a = first.a * 10.0;
    let top = curve
        .points
        .iter()
        .filter(|p| p.a <= top_a * (1.0 + 1e-9))
        .last()?;
    if top.a < first.a * 3.0 {
        return None;
    }
    let v = |p: &ForcePoint| (p.a * p.a * p.delta()).abs();
    let at_smallest = v(first);
    let at_decade_top = v(top);
    Some(GuardReport {
        at_smallest,
        at_decade_top,
        missing_level_signature: MISSING_LEVEL_A2_LIMIT,
        violated: at_smallest >= at_decade_top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiards::{analytic_spectrum, weyl_data, Shape};

    #[test]
    fn massive_energy_force_consistency() {
        for &(m, a) in &[(1.0, 1.0), (3.0, 0.2), (0.5, 2.0)] {
            let h = 1e-5 * a;
            let d = 30.0;
            let fd = -(massive_energy_1d(m, a + h, d) - massive_energy_1d(m, a - h, d)) / (2.0 * h);
            let f = massive_force_1d(m, a, d);
            assert!((fd - f).abs() <= 1e-8 * f.abs(), "{fd} vs {f}");
            assert!(f < 0.0);
        }
    }

    #[test]
    fn massive_energy_deep_truncation_stable() {
        let e30 = massive_energy_1d(1.0, 1.0, 30.0);
        let e40 = massive_energy_1d(1.0, 1.0, 40.0);
        assert!((e30 - e40).abs() <= 1e-12 * e40.abs());
        assert!(e30 < 0.0);
    }

    #[test]
    fn single_level_small_a_limit() {
        let d = 25.0;
        let v3 = 1e-6 * single_level_force(4.0, 1e-3, d);
        let v4 = 1e-8 * single_level_force(4.0, 1e-4, d);
        assert!((v3 - v4).abs() < 1e-2 * v4.abs());
        assert!((v4 - MISSING_LEVEL_A2_LIMIT).abs() < 1e-2 * v4.abs());
    }

    #[test]
    fn weyl_leading_coefficient() {
        let w = weyl_data(&Shape::unit_square(), BoundaryCondition::Dirichlet);
        let t = WeylTerms::from_weyl(&w);
        let expect = -3.0 * (PI.powi(4) / 90.0) / (16.0 * PI * PI);
        assert!((t.area - expect).abs() < 1e-15);
        assert!(t.perimeter > 0.0);
        let n = WeylTerms::from_weyl(&weyl_data(&Shape::unit_square(), BoundaryCondition::Neumann));
        assert_eq!(n.perimeter, -t.perimeter);
        assert!(n.chi > 0.0 && t.chi < 0.0);
    }

    #[test]
    fn policy_refuses_short_spectrum_and_small_a() {
        let s = analytic_spectrum(&Shape::unit_square(), BoundaryCondition::Dirichlet, 100.0).unwrap();
        let p = TruncationPolicy::new(25.0, 0.1).unwrap();
        assert!(matches!(piston_force(&s, 0.2, &p), Err(CasimirError::SpectrumTooShort { .. })));
        let p = TruncationPolicy::new(20.0, 0.1).unwrap();
        assert!(matches!(piston_force(&s, 0.05, &p), Err(CasimirError::BelowAMin { .. })));
        assert!(piston_force(&s, 0.2, &p).unwrap() < 0.0);
    }

    #[test]
    fn far_asymptote_forms_agree_at_large_argument() {
        let lambda = 4.0;
        let a = 20.0;
        let s = Spectrum::new(
            vec![crate::billiards::Level { lambda, multiplicity: 1 }],
            BoundaryCondition::Dirichlet,
            5.0,
            crate::billiards::SpectrumSource::Analytic,
        )
        .unwrap();
        let exact = far_asymptote(&s, a, 1).unwrap();
        let closed = far_asymptote_exponential(lambda, 1, a);
        let x = 2.0 * lambda * a;
        assert!((exact / closed - 1.0).abs() < 1.2 / x);
    }
}
