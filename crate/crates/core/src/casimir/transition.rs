//! Short-distance plateau of `a * delta_F` and the regular-to-chaotic jump.

use super::{force_curve, CasimirError, ForceCurve, ForceSource, TruncationPolicy};
use crate::billiards::{weyl_data, Shape, Spectrum};

/// Plateau flatness above which a fit is flagged.
pub const FLATNESS_LIMIT: f64 = 0.10;

/// Linear fit `a delta_F = c0 + c1 a` over the smallest decade of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauFit {
    /// The plateau value `U = c0`.
    pub u: f64,
    pub slope: f64,
    /// `(max - min) / |mean|` of `a delta_F` over the fitting window.
    pub flatness: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub points: usize,
    /// Set when `flatness` exceeds [`FLATNESS_LIMIT`].
    pub flagged: bool,
}

/// Fits the plateau over `[a_min, a_min * 10^decades]` of the curve.
pub fn plateau_fit(curve: &ForceCurve, decades: f64) -> Option<PlateauFit> {
    let a_lo = curve.points.first()?.a;
    let a_hi = a_lo * 10f64.powf(decades) * (1.0 + 1e-9);
    let samples: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.a <= a_hi)
        .map(|p| (p.a, p.a * p.delta()))
        .collect();
    if samples.len() < 3 {
        return None;
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let u = my - slope * mx;
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let flatness = (hi - lo) / my.abs();
    Some(PlateauFit {
        u,
        slope,
        flatness,
        a_lo,
        a_hi: samples.last().map(|s| s.0).unwrap_or(a_lo),
        points: samples.len(),
        flagged: !(flatness <= FLATNESS_LIMIT),
    })
}

/// One row of a transition study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPoint {
    pub ratio: f64,
    pub fit: PlateauFit,
}

/// Plateau value `U` of `a delta_F` for each unit-area stadium ratio, fitted over
/// the smallest decade of `grid`. `spectra[i]` is the Dirichlet spectrum of
/// the stadium with ratio `ratios[i]`.
pub fn transition_limit_u(
    ratios: &[f64],
    spectra: &[Spectrum],
    policy: &TruncationPolicy,
    grid: &[f64],
) -> Result<Vec<TransitionPoint>, CasimirError> {
    let family: Vec<(f64, Shape)> = ratios.iter().map(|&r| (r, Shape::unit_stadium(r))).collect();
    plateau_family(&family, spectra, policy, grid)
}

/// Plateau fits over the smallest decade of `grid` for a labelled family of
/// shapes with their spectra.
pub fn plateau_family(
    family: &[(f64, Shape)],
    spectra: &[Spectrum],
    policy: &TruncationPolicy,
    grid: &[f64],
) -> Result<Vec<TransitionPoint>, CasimirError> {
    if family.len() != spectra.len() {
        return Err(CasimirError::InvalidPolicy(format!("{} shapes but {} spectra", family.len(), spectra.len())));
    }
    family
        .iter()
        .zip(spectra)
        .map(|(&(ratio, shape), spectrum)| {
            let weyl = weyl_data(&shape, spectrum.bc());
            let id = shape.describe();
            let curve = force_curve(ForceSource::Single { spectrum, weyl: &weyl }, grid, policy, &id)?;
            let fit = plateau_fit(&curve, 1.0).ok_or_else(|| {
                CasimirError::InvalidPolicy(format!("grid has fewer than 3 points in the smallest decade ({id})"))
            })?;
            Ok(TransitionPoint { ratio, fit })
        })
        .collect()
}

/// `|U(0.005) - U(0)| / max(|U(0.205) - U(0.2)|, |U(0.705) - U(0.7)|)`.
pub fn jump_statistic(points: &[TransitionPoint]) -> Option<f64> {
    let u = |r: f64| points.iter().find(|p| (p.ratio - r).abs() < 1e-9).map(|p| p.fit.u);
    let jump = (u(0.005)? - u(0.0)?).abs();
    let noise = (u(0.205)? - u(0.2)?).abs().max((u(0.705)? - u(0.7)?).abs());
    Some(jump / noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casimir::{ForcePoint, ModeContent, TruncationPolicy};

    fn curve(f: impl Fn(f64) -> f64) -> ForceCurve {
        let points = crate::numerics::log_grid(0.1, 1.0, 20)
            .into_iter()
            .map(|a| ForcePoint { a, force: f(a) / a, weyl: 0.0 })
            .collect();
        ForceCurve { points, content: ModeContent::Tm, spectrum_id: "t".into(), policy: TruncationPolicy::default() }
    }

    #[test]
    fn linear_plateau_recovered() {
        let fit = plateau_fit(&curve(|a| 0.25 + 0.01 * a), 1.0).unwrap();
        assert!((fit.u - 0.25).abs() < 1e-12 && (fit.slope - 0.01).abs() < 1e-12);
        assert!(!fit.flagged);
    }

    #[test]
    fn steep_curve_flagged() {
        let fit = plateau_fit(&curve(|a| 0.1 + a), 1.0).unwrap();
        assert!(fit.flagged);
    }
}
