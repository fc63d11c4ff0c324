//! Dirichlet spectra of the quarter-stadium family by the scaling method.
//!
//! For a reference wavenumber `k` the boundary matrices
//! `F = sum w/(r.n) u_i u_j` and `G = sum w/(r.n) (u_i r.grad u_j + r.grad u_i u_j) / k`
//! form the generalised eigenproblem `G x = nu F x`. Each eigenvalue gives an
//! eigenvalue estimate `k - 2 mu + 2 mu^2 / k` with `mu = 1/nu`, accurate for
//! levels close to `k`.
//!
//! Levels are discovered in overlapping windows and each cluster of estimates
//! is refined by solving symmetrically on both sides of it: the estimate error
//! is odd in the offset from the reference wavenumber to leading order, so the
//! average of the two sides cancels it.

pub mod basis;
pub mod boundary;
pub mod cache;
pub mod certify;

use crate::billiards::{weyl_data, BilliardsError, BoundaryCondition, Shape, Spectrum, SpectrumSource, WeylData};
use basis::{evaluate, BasisKind};
use boundary::{BoundaryQuadrature, QuarterStadium};
use nalgebra::{DVector, SymmetricEigen};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

pub use cache::{cache_key, obtain_spectrum, solve_up_to_cached, SpectrumCache};
pub use certify::{certify_completeness, certify_with_window, default_window_width, CompletenessReport, OffsetKind, SuspectInterval, WindowMean};

/// Widest discovery window the basis stays well conditioned for.
pub const MAX_WINDOW_WIDTH: f64 = 1.0;
/// Estimates closer than this are assumed to come from the same cluster.
const LINK_GAP: f64 = 5e-3;
/// Discovery windows accept estimates this fraction of the width beyond their
/// own half-width. A level sitting on a window centre has vanishing boundary
/// norm and is dropped by the regularization there, so every level must also
/// be seen from a neighbouring window.
pub const DISCOVERY_OVERLAP: f64 = 0.05;
/// Revision of the refinement algorithm; part of the cache fingerprint.
pub const SOLVER_REVISION: u32 = 2;
/// Largest shift between a discovery estimate and the side-solve estimate it is
/// matched to; a larger shift means the target was spurious and the match
/// belongs to a neighbouring level.
const MATCH_SHIFT: f64 = 0.03;
/// First zero of `J_0`, for the Faber-Krahn lower bound on the ground state.
const J01: f64 = 2.404_825_557_695_773;

#[derive(Debug, Error)]
pub enum HelmholtzError {
    #[error("shape not supported by the solver: {0}")]
    UnsupportedShape(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("window width {width} exceeds {max}: the boundary basis loses conditioning; use a narrower window")]
    WindowTooWide { width: f64, max: f64 },
    #[error("completeness certification failed: {count} suspect interval(s), first [{first_lo:.3}, {first_hi:.3}]")]
    CertificationFailed { count: usize, first_lo: f64, first_hi: f64, report: Box<CompletenessReport> },
    #[error(transparent)]
    Billiards(#[from] BilliardsError),
    #[error("cache i/o error: {0}")]
    Io(String),
}

/// Discretisation and acceptance settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Boundary nodes per wavelength, at least 8.
    pub points_per_wavelength: f64,
    /// Basis size relative to the semiclassical count `perimeter * k / 2 pi`.
    pub basis_size_factor: f64,
    /// Width in `lambda` of each discovery window.
    pub window_width: f64,
    /// Largest accepted boundary tension of a level.
    pub tension_threshold: f64,
    /// Relative accuracy target for each eigenvalue.
    pub target_relative_accuracy: f64,
    pub basis: BasisKind,
    /// Offset of the symmetric refinement solves.
    pub refine_step: f64,
    pub max_refine_iterations: usize,
    /// Relative cutoff on the eigenvalues of `F`.
    pub regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            points_per_wavelength: 10.0,
            basis_size_factor: 1.5,
            window_width: 0.4,
            tension_threshold: 5e-2,
            target_relative_accuracy: 1e-6,
            basis: BasisKind::PlaneWave,
            refine_step: 0.05,
            max_refine_iterations: 4,
            regularization: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), HelmholtzError> {
        let bad = |m: String| Err(HelmholtzError::InvalidConfig(m));
        if !(self.points_per_wavelength >= 8.0) {
            return bad(format!("points_per_wavelength = {} (need >= 8)", self.points_per_wavelength));
        }
        if !(self.window_width > 0.0) {
            return bad(format!("window_width = {} (need > 0)", self.window_width));
        }
        if self.window_width > MAX_WINDOW_WIDTH {
            return Err(HelmholtzError::WindowTooWide { width: self.window_width, max: MAX_WINDOW_WIDTH });
        }
        if !(self.basis_size_factor > 0.0) {
            return bad(format!("basis_factor = {}", self.basis_size_factor));
        }
        if !(self.tension_threshold > 0.0) {
            return bad(format!("tension_threshold = {}", self.tension_threshold));
        }
        if !(self.target_relative_accuracy > 0.0 && self.target_relative_accuracy < 1.0) {
            return bad(format!("target_accuracy = {}", self.target_relative_accuracy));
        }
        if !(self.refine_step > 0.0 && self.refine_step < self.window_width) {
            return bad(format!("refine_step = {} (need 0 < step < window_width)", self.refine_step));
        }
        if !(self.regularization > 0.0 && self.regularization < 1e-6) {
            return bad(format!("regularization = {}", self.regularization));
        }
        Ok(())
    }

    /// Stable text form of every setting that affects results.
    pub fn fingerprint(&self) -> String {
        format!(
            "rev={};ppw={:e};basis_factor={:e};window={:e};overlap={:e};tension={:e};target={:e};basis={};step={:e};iters={};reg={:e}",
            SOLVER_REVISION,
            self.points_per_wavelength,
            self.basis_size_factor,
            self.window_width,
            DISCOVERY_OVERLAP,
            self.tension_threshold,
            self.target_relative_accuracy,
            self.basis.tag(),
            self.refine_step,
            self.max_refine_iterations,
            self.regularization,
        )
    }
}

/// An accepted eigenvalue with its boundary tension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoundLevel {
    pub lambda: f64,
    /// Boundary norm over interior norm of the approximate eigenfunction.
    pub tension: f64,
}

/// Levels found in `[lambda_lo, lambda_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumWindow {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub found: Vec<FoundLevel>,
    /// Weyl estimate of the number of levels in the window.
    pub weyl_expected: f64,
    /// Levels dropped because their tension exceeded the threshold.
    pub rejected: Vec<FoundLevel>,
}

/// One eigenvalue estimate of a scaling solve with its basis coefficients.
struct Estimate {
    k: f64,
    coeffs: DVector<f64>,
}

struct Solver<'a> {
    geom: QuarterStadium,
    cfg: &'a SolverConfig,
}

impl Solver<'_> {
    /// Estimates within `half` of the reference wavenumber `k`.
    fn solve(&self, k: f64, half: f64) -> Vec<Estimate> {
        let q = BoundaryQuadrature::new(&self.geom, k, self.cfg.points_per_wavelength);
        let n = self.cfg.basis.size(&self.geom, k, self.cfg.basis_size_factor);
        let b = evaluate(self.cfg.basis, &q, k, n);
        let mut a = b.value;
        let mut d = b.radial;
        for i in 0..q.len() {
            let s = (q.w[i] / q.rn(i)).sqrt();
            a.row_mut(i).scale_mut(s);
            d.row_mut(i).scale_mut(s);
        }
        let f = a.tr_mul(&a);
        let cross = a.tr_mul(&d);
        let g = (&cross + cross.transpose()) / k;
        let fe = SymmetricEigen::new(f);
        let dmax = fe.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n).filter(|&i| fe.eigenvalues[i] > self.cfg.regularization * dmax).collect();
        if keep.is_empty() {
            return Vec::new();
        }
        let mut v = fe.eigenvectors.select_columns(&keep);
        for (c, &i) in keep.iter().enumerate() {
            v.column_mut(c).scale_mut(1.0 / fe.eigenvalues[i].sqrt());
        }
        let gt = v.tr_mul(&(&g * &v));
        let ge = SymmetricEigen::new(gt);
        let mut out = Vec::new();
        for (i, &nu) in ge.eigenvalues.iter().enumerate() {
            if nu.abs() <= 1.0 {
                continue;
            }
            let mu = 1.0 / nu;
            let est = k - 2.0 * mu + 2.0 * mu * mu / k;
            if (est - k).abs() <= half {
                out.push(Estimate { k: est, coeffs: &v * ge.eigenvectors.column(i) });
            }
        }
        out.sort_by(|x, y| x.k.total_cmp(&y.k));
        out
    }

    /// Boundary norm over interior norm of `sum c_j u_j` at wavenumber `k`.
    fn tension(&self, k: f64, coeffs: &DVector<f64>) -> f64 {
        let q = BoundaryQuadrature::new(&self.geom, k, self.cfg.points_per_wavelength);
        let b = evaluate(self.cfg.basis, &q, k, coeffs.len());
        let u = &b.value * coeffs;
        let dn = &b.normal * coeffs;
        let mut boundary = 0.0;
        let mut interior = 0.0;
        for i in 0..q.len() {
            boundary += q.w[i] * u[i] * u[i];
            interior += q.w[i] * q.rn(i) * dn[i] * dn[i];
        }
        interior /= 2.0 * k * k;
        (boundary / interior).sqrt()
    }

    /// A cluster the side solves do not reproduce. A single target is reported
    /// with infinite tension; from a larger cluster the target farthest from
    /// every side estimate is dropped and the rest refined again.
    fn drop_spurious(&self, mut targets: Vec<f64>, plus: &[Estimate], minus: &[Estimate]) -> Vec<FoundLevel> {
        if targets.len() == 1 {
            return vec![FoundLevel { lambda: targets[0], tension: f64::INFINITY }];
        }
        let dist = |t: f64, est: &[Estimate]| est.iter().map(|e| (e.k - t).abs()).fold(f64::INFINITY, f64::min);
        let worst = (0..targets.len())
            .map(|j| (j, dist(targets[j], plus).max(dist(targets[j], minus))))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        targets.remove(worst);
        self.refine(targets)
    }

    /// Refines a cluster of `m` nearby levels starting from `targets`.
    fn refine(&self, mut targets: Vec<f64>) -> Vec<FoundLevel> {
        let m = targets.len();
        let s = self.cfg.refine_step;
        let mut tensions = vec![f64::INFINITY; m];
        for _ in 0..self.cfg.max_refine_iterations.max(1) {
            let c = targets.iter().sum::<f64>() / m as f64;
            let spread = targets[m - 1] - targets[0];
            let half = s + spread + 0.1;
            let plus = self.solve(c + s, half);
            let minus = self.solve(c - s, half);
            let (ip, im) = match (nearest_run(&plus, &targets), nearest_run(&minus, &targets)) {
                (Some(p), Some(q)) => (p, q),
                // Not reproduced by the side solves: spurious, reported with infinite tension.
                _ => return self.drop_spurious(targets, &plus, &minus),
            };
            let shift = (0..m)
                .map(|j| (plus[ip + j].k - targets[j]).abs().max((minus[im + j].k - targets[j]).abs()))
                .fold(0.0, f64::max);
            if shift > MATCH_SHIFT {
                return self.drop_spurious(targets, &plus, &minus);
            }
            let next: Vec<f64> = (0..m).map(|j| 0.5 * (plus[ip + j].k + minus[im + j].k)).collect();
            for j in 0..m {
                let tp = self.tension(plus[ip + j].k, &plus[ip + j].coeffs);
                let tm = self.tension(minus[im + j].k, &minus[im + j].coeffs);
                tensions[j] = tp.min(tm);
            }
            let change = next.iter().zip(&targets).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            targets = next;
            if change < 0.1 * self.cfg.target_relative_accuracy * c {
                break;
            }
        }
        targets.into_iter().zip(tensions).map(|(lambda, tension)| FoundLevel { lambda, tension }).collect()
    }
}

/// Start of the run of `targets.len()` consecutive estimates closest to `targets`.
fn nearest_run(est: &[Estimate], targets: &[f64]) -> Option<usize> {
    let m = targets.len();
    if est.len() < m {
        return None;
    }
    (0..=est.len() - m)
        .map(|start| {
            let cost: f64 = (0..m).map(|j| (est[start + j].k - targets[j]).abs()).sum();
            (start, cost)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
}

/// A cluster of discovery estimates: `(window index, estimate)`.
#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<(usize, f64)>,
}

impl Cluster {
    /// Most estimates any single window contributed: the number of levels.
    fn multiplicity(&self) -> usize {
        let mut counts = std::collections::BTreeMap::new();
        for &(w, _) in &self.members {
            *counts.entry(w).or_insert(0usize) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    /// Starting values: the estimates of the window that saw the most levels.
    fn initial_targets(&self) -> Vec<f64> {
        let m = self.multiplicity();
        let mut by_window: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
        for &(w, k) in &self.members {
            by_window.entry(w).or_default().push(k);
        }
        let mut t = by_window.into_values().find(|v| v.len() == m).unwrap_or_default();
        t.sort_by(f64::total_cmp);
        t
    }
}

fn faber_krahn_bound(geom: &QuarterStadium) -> f64 {
    J01 * (PI / geom.area()).sqrt()
}

/// All Dirichlet eigenvalues in `[lambda_lo, lambda_hi]`.
pub fn solve_window(shape: &Shape, lambda_lo: f64, lambda_hi: f64, cfg: &SolverConfig) -> Result<SpectrumWindow, HelmholtzError> {
    cfg.validate()?;
    let geom = QuarterStadium::from_shape(shape)?;
    if !(lambda_lo.is_finite() && lambda_hi > lambda_lo && lambda_lo >= 0.0) {
        return Err(HelmholtzError::InvalidConfig(format!("window [{lambda_lo}, {lambda_hi}]")));
    }
    let solver = Solver { geom, cfg };
    let w = cfg.window_width;
    // Cover the requested interval with margin so that edge levels are refined like interior ones.
    let start = (lambda_lo - w).max(0.8 * faber_krahn_bound(&geom));
    let end = lambda_hi + w;
    let centres: Vec<f64> = (0..).map(|i| start + 0.5 * w * i as f64).take_while(|&c| c - 0.5 * w <= end).collect();
    let found: Vec<Vec<f64>> = centres
        .par_iter()
        .map(|&c| solver.solve(c, (0.5 + DISCOVERY_OVERLAP) * w).into_iter().map(|e| e.k).collect())
        .collect();
    let mut all: Vec<(usize, f64)> = found.iter().enumerate().flat_map(|(i, v)| v.iter().map(move |&k| (i, k))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut clusters: Vec<Cluster> = Vec::new();
    for (wi, k) in all {
        match clusters.last_mut() {
            Some(c) if k - c.members.last().unwrap().1 <= LINK_GAP => c.members.push((wi, k)),
            _ => clusters.push(Cluster { members: vec![(wi, k)] }),
        }
    }
    let levels = refine_clusters(&solver, clusters);
    let weyl = weyl_data(shape, BoundaryCondition::Dirichlet);
    let (mut accepted, mut rejected) = (Vec::new(), Vec::new());
    for l in levels.into_iter().filter(|l| l.lambda >= lambda_lo && l.lambda <= lambda_hi) {
        if l.tension <= cfg.tension_threshold {
            accepted.push(l);
        } else {
            rejected.push(l);
        }
    }
    Ok(SpectrumWindow {
        lambda_lo,
        lambda_hi,
        found: accepted,
        weyl_expected: weyl.count(lambda_hi * lambda_hi) - weyl.count(lambda_lo * lambda_lo),
        rejected,
    })
}

/// Refines every cluster; clusters whose refined levels coincide are merged
/// and refined jointly until the level sets are disjoint.
fn refine_clusters(solver: &Solver<'_>, mut clusters: Vec<Cluster>) -> Vec<FoundLevel> {
    let tol = 10.0 * solver.cfg.target_relative_accuracy;
    let mut results: Vec<Option<Vec<FoundLevel>>> = vec![None; clusters.len()];
    for round in 0..4 {
        let pending: Vec<usize> = (0..clusters.len()).filter(|&i| results[i].is_none()).collect();
        let fresh: Vec<Vec<FoundLevel>> =
            pending.par_iter().map(|&i| solver.refine(clusters[i].initial_targets())).collect();
        for (i, r) in pending.into_iter().zip(fresh) {
            results[i] = Some(r);
        }
        let refined: Vec<Vec<FoundLevel>> = results.iter().map(|r| r.clone().unwrap_or_default()).collect();
        if round == 3 {
            return flatten_sorted(refined);
        }
        let mut tagged: Vec<(f64, usize)> =
            refined.iter().enumerate().flat_map(|(ci, ls)| ls.iter().map(move |l| (l.lambda, ci))).collect();
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
        // union of clusters whose levels coincide
        let mut parent: Vec<usize> = (0..clusters.len()).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut merged = false;
        for pair in tagged.windows(2) {
            let ((a, ca), (b, cb)) = (pair[0], pair[1]);
            if ca != cb && b - a <= tol * b {
                let (ra, rb) = (root(&mut parent, ca), root(&mut parent, cb));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                    merged = true;
                }
            }
        }
        if !merged {
            return flatten_sorted(refined);
        }
        let mut groups: std::collections::BTreeMap<usize, (Cluster, Option<Vec<FoundLevel>>, usize)> =
            std::collections::BTreeMap::new();
        for (i, (c, r)) in clusters.into_iter().zip(results).enumerate() {
            let key = root(&mut parent, i);
            let e = groups.entry(key).or_insert((Cluster { members: vec![] }, r, 0));
            e.0.members.extend(c.members);
            e.2 += 1;
        }
        clusters = Vec::new();
        results = Vec::new();
        for (_, (mut c, r, parts)) in groups {
            c.members.sort_by(|a, b| a.1.total_cmp(&b.1));
            clusters.push(c);
            results.push(if parts == 1 { r } else { None });
        }
    }
    unreachable!("the last round returns")
}

fn flatten_sorted(refined: Vec<Vec<FoundLevel>>) -> Vec<FoundLevel> {
    let mut out: Vec<FoundLevel> = refined.into_iter().flatten().collect();
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    out
}

/// Spectrum and certificate of a complete solve.
#[derive(Debug, Clone)]
pub struct SolvedSpectrum {
    pub spectrum: Spectrum,
    pub levels: Vec<FoundLevel>,
    pub report: CompletenessReport,
}

/// Every Dirichlet level up to `lambda_max`, certified against the Weyl staircase.
pub fn solve_up_to(shape: &Shape, lambda_max: f64, cfg: &SolverConfig) -> Result<Spectrum, HelmholtzError> {
    Ok(solve_up_to_with_report(shape, lambda_max, cfg)?.spectrum)
}

/// As [`solve_up_to`], also returning per-level tensions and the certificate.
pub fn solve_up_to_with_report(shape: &Shape, lambda_max: f64, cfg: &SolverConfig) -> Result<SolvedSpectrum, HelmholtzError> {
    let geom = QuarterStadium::from_shape(shape)?;
    let lo = 0.8 * faber_krahn_bound(&geom);
    let window = solve_window(shape, lo, lambda_max, cfg)?;
    let values: Vec<f64> = window.found.iter().map(|l| l.lambda).collect();
    let spectrum = Spectrum::from_values(values, BoundaryCondition::Dirichlet, lambda_max, SpectrumSource::NumericSolver)?;
    let weyl: WeylData = weyl_data(shape, BoundaryCondition::Dirichlet);
    let report = certify_completeness(&spectrum, &weyl);
    if let Some(first) = report.suspects.first() {
        return Err(HelmholtzError::CertificationFailed {
            count: report.suspects.len(),
            first_lo: first.lo,
            first_hi: first.hi,
            report: Box::new(report),
        });
    }
    Ok(SolvedSpectrum { spectrum, levels: window.found, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiards::quarter_circle_spectrum;

    #[test]
    fn quarter_circle_ground_state() {
        let shape = Shape::unit_quarter_circle();
        let w = solve_window(&shape, 4.0, 6.0, &SolverConfig::default()).unwrap();
        let radius = match shape {
            Shape::QuarterCircle { radius } => radius,
            _ => unreachable!(),
        };
        let exact = quarter_circle_spectrum(radius, BoundaryCondition::Dirichlet, 6.0).unwrap();
        assert_eq!(w.found.len(), exact.levels().len());
        let l = w.found[0];
        let e = exact.levels()[0].lambda;
        assert!((l.lambda - e).abs() < 1e-6 * e, "{} vs {e}", l.lambda);
        assert!(l.tension < 1e-3, "tension {}", l.tension);
    }

    #[test]
    fn wide_window_rejected() {
        let cfg = SolverConfig { window_width: 1.5, ..SolverConfig::default() };
        assert!(matches!(
            solve_window(&Shape::unit_stadium(1.0), 4.0, 6.0, &cfg),
            Err(HelmholtzError::WindowTooWide { .. })
        ));
    }
}
