//! Library side of the `piston` command-line tool.
//!
//! Exit status: 0 on success, 1 when the configuration is rejected, 2 when a
//! numerical certification fails.

pub mod commands;
pub mod config;

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration rejected: {0}")]
    Config(String),
    #[error("certification failed: {0}")]
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Certification(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "piston", version, about = "Casimir forces in piston geometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute (or load from the cache) a spectrum and write it with its completeness certificate.
    Spectrum(CommonArgs),
    /// Force sweep: CSV of F, F_weyl, delta_F and a*delta_F over a log grid.
    Force {
        #[command(flatten)]
        common: CommonArgs,
        /// Append far-distance (orders 1-4) and Weyl (1-3 terms) asymptote columns.
        #[arg(long)]
        overlay: bool,
    },
    /// Plateau value U of a*delta_F for a family of stadium (or rectangle) ratios.
    Transition(CommonArgs),
    /// Run the identity suite, the contour cross-check and the completeness checks.
    Verify(CommonArgs),
    /// Print the Weyl coefficients, lowest levels and periodic-orbit constants of a shape.
    Asymptotes(CommonArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// square, rectangle, triangle, circle, quarter-circle or stadium.
    #[arg(long)]
    pub shape: Option<String>,
    /// Aspect ratio of a rectangle, or length/radius of a stadium.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Boundary condition: D (TM), N (TE) or EM (both).
    #[arg(long)]
    pub bc: Option<String>,
    /// Spectrum cutoff; every level below it is used.
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    /// Accuracy exponent: terms with 2*l*lambda*a > D are dropped.
    #[arg(long = "D")]
    pub accuracy_exponent: Option<f64>,
    #[arg(long = "a-min")]
    pub a_min: Option<f64>,
    #[arg(long = "a-max")]
    pub a_max: Option<f64>,
    #[arg(long = "points-per-decade")]
    pub points_per_decade: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Spectrum cache directory (overrides CASIMIR_CACHE_DIR).
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config file with `key = value` lines under `[section]` headers.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated ratios for `transition`.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Solver basis: plane_wave or fourier_bessel.
    #[arg(long)]
    pub basis: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> config::Overrides {
        config::Overrides {
            shape: self.shape.clone(),
            ratio: self.ratio,
            bc: self.bc.clone(),
            lambda_max: self.lambda_max,
            accuracy_exponent: self.accuracy_exponent,
            a_min: self.a_min,
            a_max: self.a_max,
            points_per_decade: self.points_per_decade,
            out: self.out.clone(),
            cache_dir: self.cache_dir.clone(),
            seed: self.seed,
            ratios: self.ratios.clone(),
            basis: self.basis.clone(),
        }
    }

    /// Merged run configuration.
    pub fn resolve(&self, defaults: config::Defaults) -> Result<config::RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => config::ConfigFile::load(p)?,
            None => config::ConfigFile::default(),
        };
        config::RunConfig::resolve(&file, &self.overrides(), defaults, std::env::var(config::CACHE_ENV).ok())
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `stdout` (unless `--out` is given) and diagnostics to `stderr`.
/// Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(&cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
