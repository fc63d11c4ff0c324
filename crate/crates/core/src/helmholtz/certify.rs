//! Completeness check of a spectrum against the smooth Weyl staircase.
//!
//! The staircase residual `N(lambda) - N_W(lambda)` is averaged exactly over
//! sliding windows. For a complete spectrum the windowed mean stays well
//! inside `(-1/2, 1/2)`; a missing level shifts every later window by `-1`,
//! a duplicated one by `+1`.

use crate::billiards::{Spectrum, WeylData};

/// Windowed mean beyond which an interval is suspect.
pub const OFFSET_THRESHOLD: f64 = 0.5;

/// Windowed mean of the staircase residual over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMean {
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetKind {
    /// Fewer levels than expected: a level is probably missing.
    Deficit,
    /// More levels than expected: a level is probably duplicated or spurious.
    Surplus,
}

/// Window where a persistent offset starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuspectInterval {
    pub lo: f64,
    pub hi: f64,
    pub mean_offset: f64,
    pub kind: OffsetKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    pub lambda_max: f64,
    pub window_width: f64,
    pub windows: Vec<WindowMean>,
    pub max_abs_mean: f64,
    pub suspects: Vec<SuspectInterval>,
    /// Defects above this value shift less than three quarters of the last window and
    /// can be hidden by the residual fluctuation.
    pub blind_from: f64,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.suspects.is_empty()
    }
}

/// Default window width `max(lambda_max / 10, 8)`.
pub fn default_window_width(lambda_max: f64) -> f64 {
    (lambda_max / 10.0).max(8.0)
}

pub fn certify_completeness(spectrum: &Spectrum, weyl: &WeylData) -> CompletenessReport {
    certify_with_window(spectrum, weyl, default_window_width(spectrum.lambda_max()))
}

/// Certification with an explicit window width; windows advance by a quarter width.
pub fn certify_with_window(spectrum: &Spectrum, weyl: &WeylData, width: f64) -> CompletenessReport {
    let lambda_max = spectrum.lambda_max();
    let levels = spectrum.levels();
    // prefix sums of multiplicity and multiplicity * lambda
    let mut cum_n = vec![0.0];
    let mut cum_l = vec![0.0];
    for l in levels {
        let m = l.multiplicity as f64;
        cum_n.push(cum_n.last().unwrap() + m);
        cum_l.push(cum_l.last().unwrap() + m * l.lambda);
    }
    let below = |v: f64| levels.partition_point(|l| l.lambda < v);
    let staircase_integral = |x: f64, y: f64| {
        let (ix, iy) = (below(x), below(y));
        cum_n[ix] * (y - x) + (cum_n[iy] - cum_n[ix]) * y - (cum_l[iy] - cum_l[ix])
    };
    let start = levels.first().map(|l| 0.5 * l.lambda).unwrap_or(0.0);
    let step = width / 4.0;
    let mut windows = Vec::new();
    let mut x = start;
    while x + width <= lambda_max * (1.0 + 1e-12) {
        let y = x + width;
        let smooth = weyl.count_integral(y) - weyl.count_integral(x);
        windows.push(WindowMean { lo: x, hi: y, mean: (staircase_integral(x, y) - smooth) / width });
        x += step;
    }
    let mut suspects = Vec::new();
    let mut prev: Option<OffsetKind> = None;
    for w in &windows {
        let kind = if w.mean < -OFFSET_THRESHOLD {
            Some(OffsetKind::Deficit)
        } else if w.mean > OFFSET_THRESHOLD {
            Some(OffsetKind::Surplus)
        } else {
            None
        };
        if let Some(k) = kind {
            if prev != Some(k) {
                suspects.push(SuspectInterval { lo: w.lo, hi: w.hi, mean_offset: w.mean, kind: k });
            }
        }
        prev = kind;
    }
    let max_abs_mean = windows.iter().map(|w| w.mean.abs()).fold(0.0, f64::max);
    let last_hi = windows.last().map_or(start, |w| w.hi);
    CompletenessReport { lambda_max, window_width: width, windows, max_abs_mean, suspects, blind_from: (last_hi - 0.75 * width).max(0.0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiards::{analytic_spectrum, weyl_data, BoundaryCondition, Shape};

    #[test]
    fn complete_square_has_no_suspects() {
        let s = Shape::unit_square();
        let sp = analytic_spectrum(&s, BoundaryCondition::Dirichlet, 125.0).unwrap();
        let r = certify_completeness(&sp, &weyl_data(&s, BoundaryCondition::Dirichlet));
        assert!(r.is_complete(), "{:?}", r.suspects);
        assert!(r.max_abs_mean < 0.3);
    }

    #[test]
    fn deleted_level_localised() {
        let s = Shape::unit_square();
        let sp = analytic_spectrum(&s, BoundaryCondition::Dirichlet, 125.0).unwrap();
        let idx = sp.levels().partition_point(|l| l.lambda < 60.0);
        let lam = sp.levels()[idx].lambda;
        let r = certify_completeness(&sp.with_one_removed(idx), &weyl_data(&s, BoundaryCondition::Dirichlet));
        assert_eq!(r.suspects.len(), 1);
        let sus = r.suspects[0];
        assert_eq!(sus.kind, OffsetKind::Deficit);
        assert!(sus.lo <= lam && lam <= sus.hi, "{lam} not in {sus:?}");
    }
}
