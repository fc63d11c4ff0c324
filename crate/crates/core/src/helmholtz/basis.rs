//! Basis functions vanishing on both axes, evaluated on the boundary nodes.

use super::boundary::{BoundaryQuadrature, QuarterStadium};
use crate::specfun::bessel_j_sequence;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Family of particular solutions of `(Delta + k^2) u = 0` with `u = 0` on
/// the axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BasisKind {
    /// `sin(k cos(t) x) sin(k sin(t) y)` with directions `t` in `(0, pi/2)`.
    #[default]
    PlaneWave,
    /// `J_{2m}(k rho) sin(2 m phi)` about the origin corner.
    FourierBessel,
}

impl BasisKind {
    pub fn tag(self) -> &'static str {
        match self {
            BasisKind::PlaneWave => "plane_wave",
            BasisKind::FourierBessel => "fourier_bessel",
        }
    }

    /// Number of basis functions at wavenumber `k`.
    pub fn size(self, geom: &QuarterStadium, k: f64, factor: f64) -> usize {
        match self {
            BasisKind::PlaneWave => ((factor * geom.perimeter() * k / (2.0 * PI)).ceil() as usize).max(12),
            BasisKind::FourierBessel => {
                let kr = k * geom.max_radius();
                ((factor / 1.5 * (kr + 8.0 * kr.cbrt()) / 2.0).ceil() as usize).max(8)
            }
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plane_wave" => Ok(BasisKind::PlaneWave),
            "fourier_bessel" => Ok(BasisKind::FourierBessel),
            other => Err(format!("unknown basis '{other}'")),
        }
    }
}

/// Basis values and derivatives on the boundary nodes (rows) for each
/// function (columns).
pub struct BasisValues {
    pub value: DMatrix<f64>,
    /// `r . grad u`.
    pub radial: DMatrix<f64>,
    /// `n . grad u`.
    pub normal: DMatrix<f64>,
}

pub fn evaluate(kind: BasisKind, q: &BoundaryQuadrature, k: f64, n: usize) -> BasisValues {
    let m = q.len();
    let mut value = DMatrix::zeros(m, n);
    let mut radial = DMatrix::zeros(m, n);
    let mut normal = DMatrix::zeros(m, n);
    match kind {
        BasisKind::PlaneWave => {
            for j in 0..n {
                let t = (j as f64 + 0.5) * PI / (2.0 * n as f64);
                let (kc, ks) = (k * t.cos(), k * t.sin());
                for i in 0..m {
                    let (sx, cx) = (kc * q.x[i]).sin_cos();
                    let (sy, cy) = (ks * q.y[i]).sin_cos();
                    let gx = kc * cx * sy;
                    let gy = ks * sx * cy;
                    value[(i, j)] = sx * sy;
                    radial[(i, j)] = q.x[i] * gx + q.y[i] * gy;
                    normal[(i, j)] = q.nx[i] * gx + q.ny[i] * gy;
                }
            }
        }
        BasisKind::FourierBessel => {
            for i in 0..m {
                let (x, y) = (q.x[i], q.y[i]);
                let rho = x.hypot(y);
                let phi = y.atan2(x);
                let kr = k * rho;
                let js = bessel_j_sequence(2 * n as u32 + 1, kr);
                let (er, ep) = ((x / rho, y / rho), (-y / rho, x / rho));
                for j in 0..n {
                    let order = 2 * (j + 1);
                    let jn = js[order];
                    let jp = 0.5 * (js[order - 1] - js[order + 1]);
                    let (s, c) = (order as f64 * phi).sin_cos();
                    let d_rho = k * jp * s;
                    let d_phi_over_rho = order as f64 * jn * c / rho;
                    let gx = d_rho * er.0 + d_phi_over_rho * ep.0;
                    let gy = d_rho * er.1 + d_phi_over_rho * ep.1;
                    value[(i, j)] = jn * s;
                    radial[(i, j)] = rho * d_rho;
                    normal[(i, j)] = q.nx[i] * gx + q.ny[i] * gy;
                }
            }
        }
    }
    BasisValues { value, radial, normal }
}
