//! Boundary quadrature for the quarter stadium with the origin at its
//! right-angle corner. Only the top segment and the arc carry weight in the
//! scaling method; the walls on the axes satisfy `r . n = 0`.

use super::HelmholtzError;
use crate::billiards::Shape;
use crate::numerics::gl16;
use std::f64::consts::PI;

/// Quarter stadium `[0, length] x [0, radius]` plus a quarter disk of
/// `radius` centred at `(length, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterStadium {
    pub radius: f64,
    pub length: f64,
}

impl QuarterStadium {
    pub fn from_shape(shape: &Shape) -> Result<Self, HelmholtzError> {
        shape.validate().map_err(|e| HelmholtzError::UnsupportedShape(e.to_string()))?;
        match *shape {
            Shape::Stadium { radius, length } => Ok(Self { radius, length }),
            Shape::QuarterCircle { radius } => Ok(Self { radius, length: 0.0 }),
            _ => Err(HelmholtzError::UnsupportedShape(shape.describe())),
        }
    }

    pub fn area(&self) -> f64 {
        self.radius * self.length + PI * self.radius * self.radius / 4.0
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * self.radius + 2.0 * self.length + PI * self.radius / 2.0
    }

    /// Largest distance from the origin corner.
    pub fn max_radius(&self) -> f64 {
        self.length + self.radius
    }
}

/// Quadrature nodes on the weighted part of the boundary.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub nx: Vec<f64>,
    pub ny: Vec<f64>,
    /// Arc-length weights.
    pub w: Vec<f64>,
}

impl BoundaryQuadrature {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `r . n` at each node.
    pub fn rn(&self, i: usize) -> f64 {
        self.x[i] * self.nx[i] + self.y[i] * self.ny[i]
    }

    /// Gauss-Legendre panels with at least `ppw` nodes per wavelength at `k`.
    pub fn new(geom: &QuarterStadium, k: f64, ppw: f64) -> Self {
        let mut q = BoundaryQuadrature { x: vec![], y: vec![], nx: vec![], ny: vec![], w: vec![] };
        let (r, l) = (geom.radius, geom.length);
        if l > 0.0 {
            q.add_piece(l, k, ppw, |s| ((s * l, r), (0.0, 1.0)));
        }
        q.add_piece(PI * r / 2.0, k, ppw, |s| {
            let th = PI / 2.0 * (1.0 - s);
            ((l + r * th.cos(), r * th.sin()), (th.cos(), th.sin()))
        });
        q
    }

    fn add_piece<F: Fn(f64) -> ((f64, f64), (f64, f64))>(&mut self, length: f64, k: f64, ppw: f64, f: F) {
        let rule = gl16();
        let order = rule.nodes.len();
        let wanted = (ppw * length * k / (2.0 * PI)).ceil().max(order as f64) as usize;
        let panels = wanted.div_ceil(order);
        for p in 0..panels {
            let a = p as f64 / panels as f64;
            let b = (p + 1) as f64 / panels as f64;
            for (s, ws) in rule.mapped(a, b) {
                let ((x, y), (nx, ny)) = f(s);
                self.x.push(x);
                self.y.push(y);
                self.nx.push(nx);
                self.ny.push(ny);
                self.w.push(ws * length);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_length_and_rn() {
        let g = QuarterStadium { radius: 0.8, length: 0.5 };
        let q = BoundaryQuadrature::new(&g, 20.0, 10.0);
        let len: f64 = q.w.iter().sum();
        assert!((len - (0.5 + PI * 0.8 / 2.0)).abs() < 1e-13);
        // int r.n dl over the whole boundary = 2 * area; the axis walls add nothing.
        let rn: f64 = (0..q.len()).map(|i| q.w[i] * q.rn(i)).sum();
        assert!((rn - 2.0 * g.area()).abs() < 1e-12);
        assert!((0..q.len()).all(|i| q.rn(i) > 0.0));
    }
}
