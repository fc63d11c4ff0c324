//! Run configuration assembled from an optional config file and flags.
//!
//! Config files are flat `key = value` text with `[section]` headers;
//! `#` starts a comment. Keys are addressed as `section.key`. Flags win over
//! the file.

use crate::CliError;
use piston_core::helmholtz::basis::BasisKind;
use piston_core::{BoundaryCondition, Shape, SolverConfig, TruncationPolicy};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Recognised config-file keys.
pub const KNOWN_KEYS: &[&str] = &[
    "shape.kind",
    "shape.ratio",
    "shape.bc",
    "policy.D",
    "policy.a_min",
    "policy.lambda_max",
    "grid.a_max",
    "grid.points_per_decade",
    "solver.points_per_wavelength",
    "solver.basis_factor",
    "solver.window_width",
    "solver.tension_threshold",
    "solver.target_accuracy",
    "solver.basis",
    "transition.ratios",
    "output.out",
    "output.cache_dir",
    "verify.seed",
];

/// Parsed `section.key -> value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| CliError::Config(format!("`{key}`: not a number: {v}"))))
            .transpose()
    }
}

/// Flag values before merging; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub shape: Option<String>,
    pub ratio: Option<f64>,
    pub bc: Option<String>,
    pub lambda_max: Option<f64>,
    pub accuracy_exponent: Option<f64>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub points_per_decade: Option<usize>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub ratios: Option<Vec<f64>>,
    pub basis: Option<String>,
}

/// Mode content requested with `--bc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcChoice {
    Single(BoundaryCondition),
    Electromagnetic,
}

impl BcChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "EM" | "em" => Ok(BcChoice::Electromagnetic),
            other => other
                .parse::<BoundaryCondition>()
                .map(BcChoice::Single)
                .map_err(|_| CliError::Config(format!("unknown boundary condition `{other}` (expected D, N or EM)"))),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BcChoice::Single(bc) => bc.tag(),
            BcChoice::Electromagnetic => "EM",
        }
    }

    pub fn conditions(self) -> Vec<BoundaryCondition> {
        match self {
            BcChoice::Single(bc) => vec![bc],
            BcChoice::Electromagnetic => vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
        }
    }
}

/// Named unit-area shape with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Square,
    Rectangle,
    Triangle,
    Circle,
    QuarterCircle,
    Stadium,
}

impl ShapeKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "square" => Ok(ShapeKind::Square),
            "rectangle" => Ok(ShapeKind::Rectangle),
            "triangle" => Ok(ShapeKind::Triangle),
            "circle" => Ok(ShapeKind::Circle),
            "quarter-circle" | "quarter_circle" => Ok(ShapeKind::QuarterCircle),
            "stadium" => Ok(ShapeKind::Stadium),
            other => Err(CliError::Config(format!(
                "unknown shape `{other}` (expected square, rectangle, triangle, circle, quarter-circle or stadium)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Circle => "circle",
            ShapeKind::QuarterCircle => "quarter-circle",
            ShapeKind::Stadium => "stadium",
        }
    }

    /// Unit-area shape; `ratio` is the aspect for rectangles and `length / radius`
    /// for stadiums.
    pub fn build(self, ratio: f64) -> Result<Shape, CliError> {
        let needs_ratio = matches!(self, ShapeKind::Rectangle | ShapeKind::Stadium);
        if needs_ratio && !(ratio.is_finite() && ratio >= 0.0) {
            return Err(CliError::Config(format!("ratio must be finite and non-negative, got {ratio}")));
        }
        let shape = match self {
            ShapeKind::Square => Shape::unit_square(),
            ShapeKind::Rectangle => Shape::unit_rectangle(ratio),
            ShapeKind::Triangle => Shape::unit_triangle(),
            ShapeKind::Circle => Shape::unit_circle(),
            ShapeKind::QuarterCircle => Shape::unit_quarter_circle(),
            ShapeKind::Stadium => Shape::unit_stadium(ratio),
        };
        shape.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(shape)
    }

    fn default_ratio(self) -> f64 {
        match self {
            ShapeKind::Rectangle => 4.0,
            ShapeKind::Stadium => 1.0,
            _ => 0.0,
        }
    }
}

impl ShapeSpec {
    pub fn ratio_or_default(&self) -> f64 {
        self.ratio.unwrap_or(self.kind.default_ratio())
    }

    pub fn build(&self) -> Result<Shape, CliError> {
        self.kind.build(self.ratio_or_default())
    }

    pub fn label(&self) -> String {
        match self.kind {
            ShapeKind::Rectangle | ShapeKind::Stadium => format!("{}:{}", self.kind.name(), self.ratio_or_default()),
            k => k.name().to_string(),
        }
    }
}

/// Everything a command needs, after merging the file and flags and checking
/// the policy against the spectrum bound.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub shape: ShapeSpec,
    pub bc: BcChoice,
    pub policy: TruncationPolicy,
    /// Every level below this value enters the force sums.
    pub lambda_max: f64,
    pub a_max: f64,
    pub points_per_decade: usize,
    pub solver: SolverConfig,
    pub out: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub ratios: Vec<f64>,
}

/// Per-command defaults that differ between commands.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub shape: ShapeKind,
    pub accuracy_exponent: f64,
    /// Used when neither `lambda_max` nor `a_min` is configured.
    pub lambda_max_analytic: f64,
    pub lambda_max_solver: f64,
    pub a_max: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            shape: ShapeKind::Square,
            accuracy_exponent: TruncationPolicy::DEFAULT_ACCURACY_EXPONENT,
            lambda_max_analytic: 250.0,
            lambda_max_solver: 125.0,
            a_max: 2.0,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_RATIOS: [f64; 6] = [0.0, 0.005, 0.2, 0.205, 0.7, 0.705];
pub const DEFAULT_CACHE_DIR: &str = ".piston-cache";
pub const CACHE_ENV: &str = "CASIMIR_CACHE_DIR";

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad number `{t}` in list"))))
        .collect()
}

impl RunConfig {
    /// Merges flags over the config file over `defaults`. The cache directory
    /// is taken from the flag, then `CASIMIR_CACHE_DIR`, then the file, then
    /// the built-in default.
    pub fn resolve(file: &ConfigFile, flags: &Overrides, defaults: Defaults, env_cache: Option<String>) -> Result<Self, CliError> {
        let kind = match flags.shape.as_deref().or(file.get("shape.kind")) {
            Some(s) => ShapeKind::parse(s)?,
            None => defaults.shape,
        };
        let ratio = match flags.ratio {
            Some(r) => Some(r),
            None => file.get_f64("shape.ratio")?,
        };
        let shape = ShapeSpec { kind, ratio };
        let built = shape.build()?;
        let bc = BcChoice::parse(flags.bc.as_deref().or(file.get("shape.bc")).unwrap_or("D"))?;

        let d = match flags.accuracy_exponent {
            Some(v) => v,
            None => file.get_f64("policy.D")?.unwrap_or(defaults.accuracy_exponent),
        };
        let lambda_max = match flags.lambda_max {
            Some(v) => Some(v),
            None => file.get_f64("policy.lambda_max")?,
        };
        let a_min = match flags.a_min {
            Some(v) => Some(v),
            None => file.get_f64("policy.a_min")?,
        };
        if !(d.is_finite() && d > 0.0) {
            return Err(CliError::Config(format!("D must be positive, got {d}")));
        }
        let default_lmax =
            if built.has_closed_form_spectrum() { defaults.lambda_max_analytic } else { defaults.lambda_max_solver };
        let (lambda_max, a_min) = match (lambda_max, a_min) {
            (Some(l), Some(a)) => (l, a),
            (Some(l), None) => (l, d / (2.0 * l)),
            (None, Some(a)) => (d / (2.0 * a), a),
            (None, None) => (default_lmax, d / (2.0 * default_lmax)),
        };
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(CliError::Config(format!("lambda_max must be positive, got {lambda_max}")));
        }
        let policy = TruncationPolicy::new(d, a_min).map_err(|e| CliError::Config(e.to_string()))?;
        if policy.required_lambda_max() > lambda_max * (1.0 + 1e-12) {
            return Err(CliError::Config(format!(
                "a_min = {a_min} with D = {d} needs every level below {:.6}, but lambda_max = {lambda_max}; \
                 raise lambda_max or a_min",
                policy.required_lambda_max()
            )));
        }

        let a_max = match flags.a_max {
            Some(v) => v,
            None => file.get_f64("grid.a_max")?.unwrap_or(defaults.a_max),
        };
        if !(a_max > a_min) {
            return Err(CliError::Config(format!("a_max = {a_max} must exceed a_min = {a_min}")));
        }
        let points_per_decade = match flags.points_per_decade {
            Some(v) => v,
            None => match file.get_f64("grid.points_per_decade")? {
                Some(v) if v >= 1.0 && v.fract() == 0.0 => v as usize,
                Some(v) => return Err(CliError::Config(format!("points_per_decade must be a positive integer, got {v}"))),
                None => 20,
            },
        };
        if points_per_decade == 0 {
            return Err(CliError::Config("points_per_decade must be positive".into()));
        }

        let mut solver = SolverConfig::default();
        if let Some(v) = file.get_f64("solver.points_per_wavelength")? {
            solver.points_per_wavelength = v;
        }
        if let Some(v) = file.get_f64("solver.basis_factor")? {
            solver.basis_size_factor = v;
        }
        if let Some(v) = file.get_f64("solver.window_width")? {
            solver.window_width = v;
        }
        if let Some(v) = file.get_f64("solver.tension_threshold")? {
            solver.tension_threshold = v;
        }
        if let Some(v) = file.get_f64("solver.target_accuracy")? {
            solver.target_relative_accuracy = v;
        }
        if let Some(b) = flags.basis.as_deref().or(file.get("solver.basis")) {
            solver.basis = b.parse::<BasisKind>().map_err(CliError::Config)?;
        }
        solver.validate().map_err(|e| CliError::Config(e.to_string()))?;

        if !built.has_closed_form_spectrum() && bc != BcChoice::Single(BoundaryCondition::Dirichlet) {
            let degenerate = matches!(built, Shape::Stadium { length, .. } if length == 0.0);
            if !degenerate {
                return Err(CliError::Config(format!(
                    "the stadium solver supports Dirichlet conditions only, got --bc {}",
                    bc.tag()
                )));
            }
        }

        let cache_dir = flags
            .cache_dir
            .clone()
            .or_else(|| env_cache.filter(|s| !s.is_empty()).map(PathBuf::from))
            .or_else(|| file.get("output.cache_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        let out = flags.out.clone().or_else(|| file.get("output.out").map(PathBuf::from));
        let seed = match flags.seed {
            Some(s) => s,
            None => match file.get("verify.seed") {
                Some(s) => s.parse().map_err(|_| CliError::Config(format!("seed must be an integer, got {s}")))?,
                None => DEFAULT_SEED,
            },
        };
        let ratios = match &flags.ratios {
            Some(r) => r.clone(),
            None => match file.get("transition.ratios") {
                Some(s) => parse_list(s)?,
                None => DEFAULT_RATIOS.to_vec(),
            },
        };
        if ratios.is_empty() || ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(CliError::Config("ratios must be a non-empty list of non-negative numbers".into()));
        }

        Ok(Self {
            shape,
            bc,
            policy,
            lambda_max,
            a_max,
            points_per_decade,
            solver,
            out,
            cache_dir,
            seed,
            ratios,
        })
    }

    /// `# key=value` lines identifying the run.
    pub fn metadata(&self, command: &str) -> Vec<(&'static str, String)> {
        let mut m = vec![
            ("command", command.to_string()),
            ("shape", self.shape.label()),
            ("bc", self.bc.tag().to_string()),
            ("lambda_max", self.lambda_max.to_string()),
            ("a_max", self.a_max.to_string()),
            ("points_per_decade", self.points_per_decade.to_string()),
        ];
        if !self.shape.build().map(|s| s.has_closed_form_spectrum()).unwrap_or(true) || command == "transition" {
            m.push(("solver", self.solver.fingerprint()));
        }
        m.push(("version", env!("CARGO_PKG_VERSION").to_string()));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(file: &str, flags: Overrides) -> Result<RunConfig, CliError> {
        RunConfig::resolve(&ConfigFile::parse(file)?, &flags, Defaults::default(), None)
    }

    #[test]
    fn sections_and_comments() {
        let f = ConfigFile::parse("# run\n[shape]\nkind = stadium # family\nratio=0.2\n\n[policy]\nD = 20\n").unwrap();
        assert_eq!(f.get("shape.kind"), Some("stadium"));
        assert_eq!(f.get_f64("shape.ratio").unwrap(), Some(0.2));
        assert_eq!(f.get_f64("policy.D").unwrap(), Some(20.0));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(ConfigFile::parse("[shape]\ncolour = red\n"), Err(CliError::Config(_))));
        assert!(matches!(ConfigFile::parse("no equals sign\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_win_over_file() {
        let c = resolve("[policy]\nD = 20\nlambda_max = 100\n", Overrides { accuracy_exponent: Some(10.0), ..Default::default() })
            .unwrap();
        assert_eq!(c.policy.accuracy_exponent, 10.0);
        assert!((c.policy.a_min - 0.05).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_policy_rejected() {
        let flags = Overrides { lambda_max: Some(100.0), a_min: Some(0.05), ..Default::default() };
        assert!(matches!(resolve("", flags), Err(CliError::Config(_))));
        let ok = Overrides { lambda_max: Some(250.0), a_min: Some(0.05), ..Default::default() };
        assert!(resolve("", ok).is_ok());
    }

    #[test]
    fn neumann_stadium_rejected() {
        let flags = Overrides { shape: Some("stadium".into()), bc: Some("N".into()), ..Default::default() };
        assert!(matches!(resolve("", flags), Err(CliError::Config(_))));
        let degenerate =
            Overrides { shape: Some("stadium".into()), ratio: Some(0.0), bc: Some("N".into()), ..Default::default() };
        assert!(resolve("", degenerate).is_ok());
    }

    #[test]
    fn cache_dir_precedence() {
        let file = ConfigFile::parse("[output]\ncache_dir = from_file\n").unwrap();
        let d = Defaults::default();
        let c = RunConfig::resolve(&file, &Overrides::default(), d, Some("from_env".into())).unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("from_env"));
        let c = RunConfig::resolve(&file, &Overrides::default(), d, None).unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("from_file"));
        let flags = Overrides { cache_dir: Some("from_flag".into()), ..Default::default() };
        let c = RunConfig::resolve(&file, &flags, d, Some("from_env".into())).unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("from_flag"));
    }

    #[test]
    fn solver_keys_applied() {
        let c = resolve("[solver]\npoints_per_wavelength = 12\nbasis = fourier_bessel\n", Overrides::default()).unwrap();
        assert_eq!(c.solver.points_per_wavelength, 12.0);
        assert_eq!(c.solver.basis, BasisKind::FourierBessel);
        assert!(matches!(resolve("[solver]\npoints_per_wavelength = 4\n", Overrides::default()), Err(CliError::Config(_))));
    }
}
