//! On-disk cache of solved spectra, keyed by shape, boundary condition,
//! cutoff and solver settings.

use super::{solve_up_to, HelmholtzError, SolverConfig};
use crate::billiards::{analytic_spectrum, BoundaryCondition, Shape, Spectrum};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Hex SHA-256 of everything that determines a solved spectrum.
pub fn cache_key(shape: &Shape, bc: BoundaryCondition, lambda_max: f64, cfg: &SolverConfig) -> String {
    let mut h = Sha256::new();
    h.update(shape.describe().as_bytes());
    h.update(b"\n");
    h.update(bc.tag().as_bytes());
    h.update(b"\n");
    h.update(format!("{lambda_max:e}").as_bytes());
    h.update(b"\n");
    h.update(cfg.fingerprint().as_bytes());
    hex::encode(h.finalize())
}

/// Directory of cached spectrum files.
#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.spectrum"))
    }

    pub fn load(&self, key: &str) -> Option<Spectrum> {
        let p = self.path_for(key);
        if p.exists() {
            Spectrum::load(&p).ok()
        } else {
            None
        }
    }

    /// Writes atomically through a temporary file in the same directory.
    pub fn store(&self, key: &str, spectrum: &Spectrum) -> Result<(), HelmholtzError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| HelmholtzError::Io(e.to_string()))?;
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        spectrum.save(&tmp)?;
        std::fs::rename(&tmp, self.path_for(key)).map_err(|e| HelmholtzError::Io(e.to_string()))
    }
}

/// [`solve_up_to`] through the cache: returns the stored spectrum when present,
/// otherwise solves, certifies and stores it.
pub fn solve_up_to_cached(
    shape: &Shape,
    lambda_max: f64,
    cfg: &SolverConfig,
    cache: Option<&SpectrumCache>,
) -> Result<Spectrum, HelmholtzError> {
    let key = cache_key(shape, BoundaryCondition::Dirichlet, lambda_max, cfg);
    if let Some(c) = cache {
        if let Some(s) = c.load(&key) {
            return Ok(s);
        }
    }
    let s = solve_up_to(shape, lambda_max, cfg)?;
    if let Some(c) = cache {
        c.store(&key, &s)?;
    }
    Ok(s)
}

/// Spectrum of any supported shape: closed form where one exists (including
/// the stadium with zero straight length, which is the quarter circle),
/// otherwise the cached Dirichlet solver.
pub fn obtain_spectrum(
    shape: &Shape,
    bc: BoundaryCondition,
    lambda_max: f64,
    cfg: &SolverConfig,
    cache: Option<&SpectrumCache>,
) -> Result<Spectrum, HelmholtzError> {
    let shape = match *shape {
        Shape::Stadium { radius, length } if length == 0.0 => Shape::QuarterCircle { radius },
        s => s,
    };
    if shape.has_closed_form_spectrum() {
        return Ok(analytic_spectrum(&shape, bc, lambda_max)?);
    }
    if bc != BoundaryCondition::Dirichlet {
        return Err(HelmholtzError::UnsupportedShape(format!("{} with {bc} boundary conditions", shape.describe())));
    }
    solve_up_to_cached(&shape, lambda_max, cfg, cache)
}
