//! Billiard cross-sections, their Weyl data, and Laplace spectra.
//!
//! A [`Spectrum`] is the sorted list of distinct eigenvalues `lambda`
//! (with `-Laplacian u = lambda^2 u`) up to a cutoff, each with its
//! multiplicity.

use crate::numerics::format_sci;
use crate::specfun::{bessel_roots_below, RootKind, SpecfunError};
use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

/// Relative tolerance used to merge numerically coincident analytic levels.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BilliardsError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("no closed-form spectrum for {0}")]
    NotAnalytic(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("spectrum file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn tag(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "D",
            BoundaryCondition::Neumann => "N",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundaryCondition {
    type Err = BilliardsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "D" | "d" | "dirichlet" | "Dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "N" | "n" | "neumann" | "Neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(BilliardsError::InvalidSpectrum(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Piston cross-sections.
///
/// The quarter stadium is the rectangle `[0, length] x [0, radius]` joined to
/// a quarter disk of the given radius centred at `(length, 0)`; `length = 0`
/// is the quarter circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Rectangle { lx: f64, ly: f64 },
    EquilateralTriangle { side: f64 },
    Circle { radius: f64 },
    QuarterCircle { radius: f64 },
    Stadium { radius: f64, length: f64 },
}

impl Shape {
    pub fn unit_square() -> Self {
        Shape::Rectangle { lx: 1.0, ly: 1.0 }
    }

    /// Unit-area rectangle with `lx / ly = aspect`.
    pub fn unit_rectangle(aspect: f64) -> Self {
        Shape::Rectangle { lx: aspect.sqrt(), ly: 1.0 / aspect.sqrt() }
    }

    pub fn unit_triangle() -> Self {
        Shape::EquilateralTriangle { side: 2.0 / 3f64.powf(0.25) }
    }

    pub fn unit_circle() -> Self {
        Shape::Circle { radius: 1.0 / PI.sqrt() }
    }

    pub fn unit_quarter_circle() -> Self {
        Shape::QuarterCircle { radius: 2.0 / PI.sqrt() }
    }

    /// Unit-area quarter stadium with `length / radius = ratio`.
    pub fn unit_stadium(ratio: f64) -> Self {
        let radius = 1.0 / (ratio + PI / 4.0).sqrt();
        Shape::Stadium { radius, length: ratio * radius }
    }

    pub fn validate(&self) -> Result<(), BilliardsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            Shape::Rectangle { lx, ly } => ok(lx) && ok(ly),
            Shape::EquilateralTriangle { side } => ok(side),
            Shape::Circle { radius } | Shape::QuarterCircle { radius } => ok(radius),
            Shape::Stadium { radius, length } => ok(radius) && length.is_finite() && length >= 0.0,
        };
        if valid {
            Ok(())
        } else {
            Err(BilliardsError::InvalidShape(format!("{self:?}")))
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Rectangle { lx, ly } => lx * ly,
            Shape::EquilateralTriangle { side } => 3f64.sqrt() / 4.0 * side * side,
            Shape::Circle { radius } => PI * radius * radius,
            Shape::QuarterCircle { radius } => PI * radius * radius / 4.0,
            Shape::Stadium { radius, length } => radius * length + PI * radius * radius / 4.0,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            Shape::Rectangle { lx, ly } => 2.0 * (lx + ly),
            Shape::EquilateralTriangle { side } => 3.0 * side,
            Shape::Circle { radius } => 2.0 * PI * radius,
            Shape::QuarterCircle { radius } => 2.0 * radius + PI * radius / 2.0,
            Shape::Stadium { radius, length } => 2.0 * radius + 2.0 * length + PI * radius / 2.0,
        }
    }

    /// Corner and curvature constant: `sum (pi/a - a/pi)/24 + (1/12 pi) int kappa`.
    pub fn chi(&self) -> f64 {
        let corner = |alpha: f64| (PI / alpha - alpha / PI) / 24.0;
        let curvature = |total: f64| total / (12.0 * PI);
        match *self {
            Shape::Rectangle { .. } => 4.0 * corner(PI / 2.0),
            Shape::EquilateralTriangle { .. } => 3.0 * corner(PI / 3.0),
            Shape::Circle { .. } => curvature(2.0 * PI),
            Shape::QuarterCircle { .. } | Shape::Stadium { .. } => {
                3.0 * corner(PI / 2.0) + curvature(PI / 2.0)
            }
        }
    }

    /// The same shape scaled linearly by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Shape::Rectangle { lx, ly } => Shape::Rectangle { lx: lx * factor, ly: ly * factor },
            Shape::EquilateralTriangle { side } => Shape::EquilateralTriangle { side: side * factor },
            Shape::Circle { radius } => Shape::Circle { radius: radius * factor },
            Shape::QuarterCircle { radius } => Shape::QuarterCircle { radius: radius * factor },
            Shape::Stadium { radius, length } => {
                Shape::Stadium { radius: radius * factor, length: length * factor }
            }
        }
    }

    pub fn normalized_to_unit_area(&self) -> Self {
        self.scaled(1.0 / self.area().sqrt())
    }

    pub fn has_closed_form_spectrum(&self) -> bool {
        !matches!(self, Shape::Stadium { .. })
    }

    /// Short human-readable description, also used in file metadata.
    pub fn describe(&self) -> String {
        match *self {
            Shape::Rectangle { lx, ly } => format!("rectangle(lx={lx},ly={ly})"),
            Shape::EquilateralTriangle { side } => format!("triangle(side={side})"),
            Shape::Circle { radius } => format!("circle(radius={radius})"),
            Shape::QuarterCircle { radius } => format!("quarter-circle(radius={radius})"),
            Shape::Stadium { radius, length } => format!("stadium(radius={radius},length={length})"),
        }
    }
}

/// Geometric data entering the Weyl expansion of the counting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylData {
    pub area: f64,
    pub perimeter: f64,
    /// Geometric corner/curvature constant (independent of the boundary condition).
    pub chi: f64,
    pub bc: BoundaryCondition,
}

impl WeylData {
    /// Perimeter coefficient with the boundary-condition sign applied (`-P` for Dirichlet).
    pub fn signed_perimeter(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => -self.perimeter,
            BoundaryCondition::Neumann => self.perimeter,
        }
    }

    /// Constant term of the counting function; Neumann drops the zero mode.
    pub fn constant(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => self.chi,
            BoundaryCondition::Neumann => self.chi - 1.0,
        }
    }

    /// Smoothed counting function `N(eps)` with `eps = lambda^2`.
    pub fn count(&self, eps: f64) -> f64 {
        let eps = eps.max(0.0);
        self.area * eps / (4.0 * PI) + self.signed_perimeter() * eps.sqrt() / (4.0 * PI) + self.constant()
    }

    /// Antiderivative in `lambda` of `count(lambda^2)`.
    pub fn count_integral(&self, lambda: f64) -> f64 {
        self.area * lambda.powi(3) / (12.0 * PI)
            + self.signed_perimeter() * lambda * lambda / (8.0 * PI)
            + self.constant() * lambda
    }
}

pub fn weyl_data(shape: &Shape, bc: BoundaryCondition) -> WeylData {
    WeylData { area: shape.area(), perimeter: shape.perimeter(), chi: shape.chi(), bc }
}

/// `N_W(eps) = A eps/4pi -/+ P sqrt(eps)/4pi + chi` (Neumann: `+P`, `chi - 1`).
pub fn weyl_count(weyl: &WeylData, eps: f64) -> f64 {
    weyl.count(eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub lambda: f64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumSource {
    Analytic,
    BesselRoots,
    NumericSolver,
}

impl SpectrumSource {
    pub fn tag(self) -> &'static str {
        match self {
            SpectrumSource::Analytic => "analytic",
            SpectrumSource::BesselRoots => "bessel_roots",
            SpectrumSource::NumericSolver => "numeric_solver",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "analytic" => Some(SpectrumSource::Analytic),
            "bessel_roots" => Some(SpectrumSource::BesselRoots),
            "numeric_solver" => Some(SpectrumSource::NumericSolver),
            _ => None,
        }
    }
}

/// Sorted distinct eigenvalues below a cutoff, with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    levels: Vec<Level>,
    bc: BoundaryCondition,
    lambda_max: f64,
    source: SpectrumSource,
}

impl Spectrum {
    pub fn new(
        levels: Vec<Level>,
        bc: BoundaryCondition,
        lambda_max: f64,
        source: SpectrumSource,
    ) -> Result<Self, BilliardsError> {
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(BilliardsError::InvalidSpectrum(format!("lambda_max = {lambda_max}")));
        }
        let mut prev = 0.0;
        for l in &levels {
            if !(l.lambda.is_finite() && l.lambda > prev) {
                return Err(BilliardsError::InvalidSpectrum(format!(
                    "levels must be positive and strictly increasing (found {} after {prev})",
                    l.lambda
                )));
            }
            if l.multiplicity == 0 {
                return Err(BilliardsError::InvalidSpectrum(format!("zero multiplicity at {}", l.lambda)));
            }
            if l.lambda > lambda_max {
                return Err(BilliardsError::InvalidSpectrum(format!(
                    "level {} above lambda_max {lambda_max}",
                    l.lambda
                )));
            }
            prev = l.lambda;
        }
        Ok(Self { levels, bc, lambda_max, source })
    }

    /// Builds a spectrum from raw eigenvalues, merging values that agree to
    /// [`MERGE_TOLERANCE`] relative accuracy into one level.
    pub fn from_values(
        mut values: Vec<f64>,
        bc: BoundaryCondition,
        lambda_max: f64,
        source: SpectrumSource,
    ) -> Result<Self, BilliardsError> {
        values.retain(|&v| v <= lambda_max);
        values.sort_by(f64::total_cmp);
        let mut levels: Vec<Level> = Vec::new();
        let mut anchor = f64::NAN;
        for v in values {
            match levels.last_mut() {
                Some(last) if (v - anchor).abs() <= MERGE_TOLERANCE * v => last.multiplicity += 1,
                _ => {
                    anchor = v;
                    levels.push(Level { lambda: v, multiplicity: 1 });
                }
            }
        }
        Self::new(levels, bc, lambda_max, source)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_count(&self) -> u64 {
        self.levels.iter().map(|l| l.multiplicity as u64).sum()
    }

    /// Number of eigenvalues `<= lambda`, with multiplicity.
    pub fn count_below(&self, lambda: f64) -> u64 {
        self.levels.iter().take_while(|l| l.lambda <= lambda).map(|l| l.multiplicity as u64).sum()
    }

    /// The `n`-th eigenvalue (1-based) counted with multiplicity.
    pub fn nth_eigenvalue(&self, n: u64) -> Option<f64> {
        let mut seen = 0;
        for l in &self.levels {
            seen += l.multiplicity as u64;
            if seen >= n {
                return Some(l.lambda);
            }
        }
        None
    }

    /// Copy restricted to levels `<= lambda_max`.
    pub fn truncated(&self, lambda_max: f64) -> Spectrum {
        let lambda_max = lambda_max.min(self.lambda_max);
        let levels = self.levels.iter().copied().take_while(|l| l.lambda <= lambda_max).collect();
        Spectrum { levels, bc: self.bc, lambda_max, source: self.source }
    }

    /// Copy with one eigenvalue of the level at `index` removed.
    pub fn with_one_removed(&self, index: usize) -> Spectrum {
        let mut levels = self.levels.clone();
        if levels[index].multiplicity > 1 {
            levels[index].multiplicity -= 1;
        } else {
            levels.remove(index);
        }
        Spectrum { levels, ..self.clone() }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# bc={} lambda_max={} source={}", self.bc.tag(), self.lambda_max, self.source.tag())?;
        for l in &self.levels {
            writeln!(w, "{},{}", format_sci(l.lambda, 12), l.multiplicity)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Spectrum, BilliardsError> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(BilliardsError::Parse { line: 1, message: "empty file".into() })?;
        let header = header?;
        let perr = |line: usize, message: String| BilliardsError::Parse { line, message };
        let body = header
            .strip_prefix('#')
            .ok_or_else(|| perr(1, "missing `#` header".into()))?;
        let (mut bc, mut lambda_max, mut source) = (None, None, None);
        for field in body.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| perr(1, format!("bad field `{field}`")))?;
            match k {
                "bc" => bc = Some(v.parse::<BoundaryCondition>().map_err(|e| perr(1, e.to_string()))?),
                "lambda_max" => lambda_max = Some(v.parse::<f64>().map_err(|e| perr(1, e.to_string()))?),
                "source" => {
                    source = Some(SpectrumSource::from_tag(v).ok_or_else(|| perr(1, format!("unknown source `{v}`")))?)
                }
                _ => {}
            }
        }
        let (bc, lambda_max, source) = match (bc, lambda_max, source) {
            (Some(b), Some(l), Some(s)) => (b, l, s),
            _ => return Err(perr(1, "header needs bc, lambda_max and source".into())),
        };
        let mut levels = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (a, b) = t.split_once(',').ok_or_else(|| perr(i + 1, format!("expected `lambda,multiplicity`: `{t}`")))?;
            let lambda = a.trim().parse::<f64>().map_err(|e| perr(i + 1, e.to_string()))?;
            let multiplicity = b.trim().parse::<u32>().map_err(|e| perr(i + 1, e.to_string()))?;
            levels.push(Level { lambda, multiplicity });
        }
        Spectrum::new(levels, bc, lambda_max, source)
    }

    pub fn save(&self, path: &Path) -> Result<(), BilliardsError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Spectrum, BilliardsError> {
        let f = std::fs::File::open(path)?;
        Spectrum::read_from(std::io::BufReader::new(f))
    }
}

/// Closed-form spectrum (rectangle, triangle) or Bessel-root spectrum (circle,
/// quarter circle) up to `lambda_max`.
pub fn analytic_spectrum(
    shape: &Shape,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, BilliardsError> {
    shape.validate()?;
    match *shape {
        Shape::Rectangle { lx, ly } => rectangle_spectrum(lx, ly, bc, lambda_max),
        Shape::EquilateralTriangle { side } => triangle_spectrum(side, bc, lambda_max),
        Shape::Circle { radius } => circle_spectrum(radius, bc, lambda_max),
        Shape::QuarterCircle { radius } => quarter_circle_spectrum(radius, bc, lambda_max),
        Shape::Stadium { .. } => Err(BilliardsError::NotAnalytic(shape.describe())),
    }
}

pub fn rectangle_spectrum(
    lx: f64,
    ly: f64,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, BilliardsError> {
    let start = match bc {
        BoundaryCondition::Dirichlet => 1,
        BoundaryCondition::Neumann => 0,
    };
    let nmax = (lambda_max * lx / PI).floor() as u64;
    let mmax = (lambda_max * ly / PI).floor() as u64;
    let mut values = Vec::new();
    for n in start..=nmax {
        let kx = n as f64 * PI / lx;
        for m in start..=mmax {
            if n == 0 && m == 0 {
                continue;
            }
            let ky = m as f64 * PI / ly;
            let v = kx.hypot(ky);
            if v > lambda_max {
                break;
            }
            values.push(v);
        }
    }
    Spectrum::from_values(values, bc, lambda_max, SpectrumSource::Analytic)
}

/// Equilateral triangle: `lambda = (4 pi / 3L) sqrt(m^2 + m n + n^2)` over
/// ordered pairs, `m, n >= 1` (Dirichlet) or `m, n >= 0` without `(0, 0)` (Neumann).
pub fn triangle_spectrum(
    side: f64,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, BilliardsError> {
    let c = 4.0 * PI / (3.0 * side);
    let start = match bc {
        BoundaryCondition::Dirichlet => 1,
        BoundaryCondition::Neumann => 0,
    };
    let bound = (lambda_max / c).floor() as u64 + 1;
    let mut values = Vec::new();
    for m in start..=bound {
        for n in start..=bound {
            if m == 0 && n == 0 {
                continue;
            }
            let (mf, nf) = (m as f64, n as f64);
            let v = c * (mf * mf + mf * nf + nf * nf).sqrt();
            if v > lambda_max {
                break;
            }
            values.push(v);
        }
    }
    Spectrum::from_values(values, bc, lambda_max, SpectrumSource::Analytic)
}

pub fn circle_spectrum(
    radius: f64,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, BilliardsError> {
    let kind = root_kind(bc);
    let xmax = lambda_max * radius;
    let mut values = Vec::new();
    for n in 0..=(xmax.floor() as u32 + 1) {
        let roots = bessel_roots_below(n, xmax, kind);
        if roots.is_empty() && n as f64 > xmax {
            break;
        }
        for r in roots {
            let v = r / radius;
            values.push(v);
            if n > 0 {
                values.push(v);
            }
        }
    }
    Spectrum::from_values(values, bc, lambda_max, SpectrumSource::BesselRoots)
}

/// Quarter disk: even orders `J_{2k}` (`k >= 1` Dirichlet, `k >= 0` Neumann).
pub fn quarter_circle_spectrum(
    radius: f64,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, BilliardsError> {
    let kind = root_kind(bc);
    let xmax = lambda_max * radius;
    let first = match bc {
        BoundaryCondition::Dirichlet => 2,
        BoundaryCondition::Neumann => 0,
    };
    let mut values = Vec::new();
    let mut n = first;
    while n as f64 <= xmax + 1.0 {
        values.extend(bessel_roots_below(n, xmax, kind).into_iter().map(|r| r / radius));
        n += 2;
    }
    Spectrum::from_values(values, bc, lambda_max, SpectrumSource::BesselRoots)
}

fn root_kind(bc: BoundaryCondition) -> RootKind {
    match bc {
        BoundaryCondition::Dirichlet => RootKind::Value,
        BoundaryCondition::Neumann => RootKind::Derivative,
    }
}
