//! The five subcommands.

use crate::config::{BcChoice, Defaults, RunConfig, ShapeKind};
use crate::{CliError, Command, CommonArgs};
use piston_core::billiards::{weyl_count, weyl_data, BoundaryCondition, Shape, Spectrum};
use piston_core::casimir::{
    circle_force_contour, eq16_guard, force_curve, jump_statistic, plateau_family, piston_force, AsymptoteSet,
    CasimirError, ContourConfig, ForceCurve, ForceSource, TransitionPoint, TruncationPolicy, WeylTerms,
};
use piston_core::helmholtz::{certify_completeness, obtain_spectrum, CompletenessReport, HelmholtzError, SpectrumCache};
use piston_core::identities::verify_identities;
use piston_core::numerics::{format_sci, log_grid};
use piston_core::orbits::orbit_constants;
use std::io::Write;

/// Number of random samples per identity in `verify`.
pub const IDENTITY_SAMPLES: usize = 64;
/// Relative agreement required between the contour and root-sum circle forces.
pub const CONTOUR_TOLERANCE: f64 = 1e-6;
/// Cutoff used by `asymptotes` to collect the lowest levels.
const ASYMPTOTE_LAMBDA_MAX: f64 = 20.0;

pub fn dispatch(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Spectrum(args) => cmd_spectrum(args, stdout, stderr),
        Command::Force { common, overlay } => cmd_force(common, *overlay, stdout, stderr),
        Command::Transition(args) => cmd_transition(args, stdout, stderr),
        Command::Verify(args) => cmd_verify(args, stdout, stderr),
        Command::Asymptotes(args) => cmd_asymptotes(args, stdout, stderr),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Config(format!("i/o error: {e}"))
}

fn helmholtz_err(e: HelmholtzError) -> CliError {
    match e {
        HelmholtzError::CertificationFailed { .. } => CliError::Certification(e.to_string()),
        HelmholtzError::Billiards(_) => CliError::Certification(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn casimir_err(e: CasimirError) -> CliError {
    match e {
        CasimirError::Specfun(_) | CasimirError::Contour(_) => CliError::Certification(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Runs `body` against the `--out` file, or against `stdout` when none is given.
fn with_output(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
            body(&mut f).map_err(io_err)?;
            f.flush().map_err(io_err)
        }
        None => body(stdout).map_err(io_err),
    }
}

fn spectrum_for(cfg: &RunConfig, shape: &Shape, bc: BoundaryCondition, lambda_max: f64) -> Result<Spectrum, CliError> {
    let cache = SpectrumCache::new(&cfg.cache_dir);
    obtain_spectrum(shape, bc, lambda_max, &cfg.solver, Some(&cache)).map_err(helmholtz_err)
}

fn certificate_summary(shape: &Shape, spectrum: &Spectrum, report: &CompletenessReport) -> String {
    let weyl = weyl_data(shape, spectrum.bc());
    let lambda1 = spectrum.levels().first().map(|l| l.lambda).unwrap_or(f64::NAN);
    format!(
        "{} {}: {} levels below {} (Weyl {:.1}), lambda_1 = {:.10}, max |windowed N - N_W| = {:.3}, suspects = {}, blind above {:.2}",
        shape.describe(),
        spectrum.bc(),
        spectrum.total_count(),
        spectrum.lambda_max(),
        weyl_count(&weyl, spectrum.lambda_max().powi(2)),
        lambda1,
        report.max_abs_mean,
        report.suspects.len(),
        report.blind_from,
    )
}

fn cmd_spectrum(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(Defaults::default())?;
    let bc = match cfg.bc {
        BcChoice::Single(bc) => bc,
        BcChoice::Electromagnetic => {
            return Err(CliError::Config("spectrum writes one boundary condition; use --bc D or --bc N".into()))
        }
    };
    let shape = cfg.shape.build()?;
    let spectrum = spectrum_for(&cfg, &shape, bc, cfg.lambda_max)?;
    let report = certify_completeness(&spectrum, &weyl_data(&shape, bc));
    writeln!(stderr, "{}", certificate_summary(&shape, &spectrum, &report)).map_err(io_err)?;
    with_output(&cfg, stdout, |w| spectrum.write_to(w))?;
    if let Some(s) = report.suspects.first() {
        return Err(CliError::Certification(format!(
            "{} suspect interval(s), first [{:.3}, {:.3}] with mean offset {:.3}",
            report.suspects.len(),
            s.lo,
            s.hi,
            s.mean_offset
        )));
    }
    Ok(())
}

struct Spectra {
    shape: Shape,
    spectra: Vec<Spectrum>,
}

impl Spectra {
    fn load(cfg: &RunConfig, shape: Shape, lambda_max: f64) -> Result<Self, CliError> {
        let spectra = cfg
            .bc
            .conditions()
            .into_iter()
            .map(|bc| spectrum_for(cfg, &shape, bc, lambda_max))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { shape, spectra })
    }

    fn weyls(&self) -> Vec<piston_core::WeylData> {
        self.spectra.iter().map(|s| weyl_data(&self.shape, s.bc())).collect()
    }

    fn curve(&self, grid: &[f64], policy: &TruncationPolicy, id: &str) -> Result<ForceCurve, CliError> {
        let weyls = self.weyls();
        let source = match self.spectra.as_slice() {
            [s] => ForceSource::Single { spectrum: s, weyl: &weyls[0] },
            [d, n] => ForceSource::Electromagnetic { dirichlet: d, neumann: n, weyl_d: &weyls[0], weyl_n: &weyls[1] },
            _ => unreachable!("one or two boundary conditions"),
        };
        force_curve(source, grid, policy, id).map_err(casimir_err)
    }

    fn asymptotes(&self) -> AsymptoteSet {
        let weyls = self.weyls();
        let sets: Vec<AsymptoteSet> = self.spectra.iter().zip(&weyls).map(|(s, w)| AsymptoteSet::new(s, w, 4)).collect();
        match sets.as_slice() {
            [a] => a.clone(),
            [a, b] => a.combined(b),
            _ => unreachable!("one or two boundary conditions"),
        }
    }
}

fn cmd_force(args: &CommonArgs, overlay: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(Defaults::default())?;
    let shape = cfg.shape.build()?;
    let spectra = Spectra::load(&cfg, shape, cfg.lambda_max)?;
    let grid = log_grid(cfg.policy.a_min, cfg.a_max, cfg.points_per_decade);
    let curve = spectra.curve(&grid, &cfg.policy, &cfg.shape.label())?;
    let overlay_set = overlay.then(|| spectra.asymptotes());
    with_output(&cfg, stdout, |w| curve.write_csv(w, &cfg.metadata("force"), overlay_set.as_ref()))?;
    match eq16_guard(&curve) {
        Some(g) => {
            writeln!(
                stderr,
                "a^2 delta_F guard: {:.3e} at a = {} vs {:.3e} a decade up ({})",
                g.at_smallest,
                curve.points[0].a,
                g.at_decade_top,
                if g.violated { "VIOLATED" } else { "ok" }
            )
            .map_err(io_err)?;
            if g.violated {
                return Err(CliError::Certification(format!(
                    "a^2 delta_F does not decrease towards a_min; a missing level gives a^2 delta_F -> {:.4}",
                    g.missing_level_signature
                )));
            }
        }
        None => writeln!(stderr, "a^2 delta_F guard skipped: grid spans less than half a decade").map_err(io_err)?,
    }
    Ok(())
}

/// Plateau fits for every configured ratio.
pub fn transition_points(cfg: &RunConfig) -> Result<Vec<TransitionPoint>, CliError> {
    if !matches!(cfg.shape.kind, ShapeKind::Stadium | ShapeKind::Rectangle) {
        return Err(CliError::Config("transition needs --shape stadium or --shape rectangle".into()));
    }
    let bc = match cfg.bc {
        BcChoice::Single(bc) => bc,
        BcChoice::Electromagnetic => return Err(CliError::Config("transition uses a single boundary condition".into())),
    };
    let family = cfg
        .ratios
        .iter()
        .map(|&r| cfg.shape.kind.build(r).map(|s| (r, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let spectra = family
        .iter()
        .map(|(_, s)| spectrum_for(cfg, s, bc, cfg.lambda_max))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = log_grid(cfg.policy.a_min, cfg.a_max, cfg.points_per_decade);
    plateau_family(&family, &spectra, &cfg.policy, &grid).map_err(casimir_err)
}

/// Defaults of the transition study: stadium family to lambda = 125 with `a_min = 0.08`.
pub fn transition_defaults() -> Defaults {
    Defaults { shape: ShapeKind::Stadium, accuracy_exponent: 20.0, lambda_max_solver: 125.0, lambda_max_analytic: 125.0, a_max: 2.0 }
}

fn cmd_transition(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(transition_defaults())?;
    let points = transition_points(&cfg)?;
    let mut meta = cfg.metadata("transition");
    meta.retain(|(k, _)| *k != "shape");
    meta.insert(1, ("family", cfg.shape.kind.name().to_string()));
    meta.push(("D", cfg.policy.accuracy_exponent.to_string()));
    meta.push(("a_min", cfg.policy.a_min.to_string()));
    with_output(&cfg, stdout, |w| {
        for (k, v) in &meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "ratio,U,flatness")?;
        for p in &points {
            writeln!(w, "{},{},{}", p.ratio, format_sci(p.fit.u, 10), format_sci(p.fit.flatness, 10))?;
        }
        Ok(())
    })?;
    for p in points.iter().filter(|p| p.fit.flagged) {
        writeln!(stderr, "warning: no plateau for ratio {} (flatness {:.3})", p.ratio, p.fit.flatness).map_err(io_err)?;
    }
    match jump_statistic(&points) {
        Some(j) => writeln!(stderr, "J = {}", format_sci(j, 6)).map_err(io_err)?,
        None => writeln!(stderr, "J not available: needs ratios 0, 0.005, 0.2, 0.205, 0.7 and 0.705").map_err(io_err)?,
    }
    Ok(())
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every verification check, in a fixed order.
pub fn verification_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let report = verify_identities(IDENTITY_SAMPLES, seed);
    for c in &report.checks {
        checks.push(Check {
            name: format!("identity {}", c.name),
            passed: c.passed(),
            detail: format!("worst rel err {:.2e} (tol {:.0e}) at {}", c.worst_rel_error, c.tolerance, c.worst_params),
        });
    }

    let radius = match Shape::unit_circle() {
        Shape::Circle { radius } => radius,
        _ => unreachable!(),
    };
    let d = TruncationPolicy::DEFAULT_ACCURACY_EXPONENT;
    let policy = TruncationPolicy::new(d, 0.1).map_err(casimir_err)?;
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let spectrum =
            piston_core::billiards::circle_spectrum(radius, bc, policy.required_lambda_max()).map_err(|e| CliError::Certification(e.to_string()))?;
        let mut worst: f64 = 0.0;
        for a in log_grid(0.1, 1.0, 4) {
            let contour = circle_force_contour(radius, bc, a, d, &ContourConfig::default()).map_err(casimir_err)?;
            let direct = piston_force(&spectrum, a, &policy).map_err(casimir_err)?;
            worst = worst.max((contour / direct - 1.0).abs());
        }
        checks.push(Check {
            name: format!("contour vs roots circle {bc}"),
            passed: worst <= CONTOUR_TOLERANCE,
            detail: format!("worst rel diff {worst:.2e} over 5 separations in [0.1, 1]"),
        });
    }

    let lambda_max = 125.0;
    let policy = TruncationPolicy::for_spectrum_bound(d, lambda_max).map_err(casimir_err)?;
    let grid = log_grid(policy.a_min, 2.0, 20);
    let shapes = [
        ("square", Shape::unit_square()),
        ("rectangle:4", Shape::unit_rectangle(4.0)),
        ("triangle", Shape::unit_triangle()),
        ("circle", Shape::unit_circle()),
        ("quarter-circle", Shape::unit_quarter_circle()),
    ];
    for (name, shape) in shapes {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let spectrum = piston_core::analytic_spectrum(&shape, bc, lambda_max).map_err(|e| CliError::Certification(e.to_string()))?;
            let weyl = weyl_data(&shape, bc);
            let report = certify_completeness(&spectrum, &weyl);
            let curve = force_curve(ForceSource::Single { spectrum: &spectrum, weyl: &weyl }, &grid, &policy, name)
                .map_err(casimir_err)?;
            let guard = eq16_guard(&curve).expect("grid spans more than a decade");
            checks.push(Check {
                name: format!("complete {name} {bc}"),
                passed: report.is_complete() && !guard.violated,
                detail: format!(
                    "max |windowed N - N_W| {:.3}, |a^2 dF| {:.2e} -> {:.2e}",
                    report.max_abs_mean, guard.at_decade_top, guard.at_smallest
                ),
            });
        }
    }

    let shape = Shape::unit_square();
    let weyl = weyl_data(&shape, BoundaryCondition::Dirichlet);
    let spectrum = piston_core::analytic_spectrum(&shape, BoundaryCondition::Dirichlet, lambda_max)
        .map_err(|e| CliError::Certification(e.to_string()))?;
    // The guard resolves a missing level only while 2 lambda a_min stays of
    // order one; certification localizes a gap anywhere below lambda_max.
    for target in [8.0, 60.0] {
        let idx = spectrum.levels().partition_point(|l| l.lambda < target);
        let removed = spectrum.levels()[idx].lambda;
        let broken = spectrum.with_one_removed(idx);
        let report = certify_completeness(&broken, &weyl);
        let localized =
            report.suspects.len() == 1 && report.suspects[0].lo <= removed && removed <= report.suspects[0].hi;
        let resolvable = 2.0 * removed * policy.a_min <= 5.0;
        let guard = if resolvable {
            let curve = force_curve(ForceSource::Single { spectrum: &broken, weyl: &weyl }, &grid, &policy, "square-defect")
                .map_err(casimir_err)?;
            Some(eq16_guard(&curve).expect("grid spans more than a decade").violated)
        } else {
            None
        };
        checks.push(Check {
            name: format!("defect at lambda {removed:.4} square D"),
            passed: localized && guard != Some(false),
            detail: format!(
                "guard {}; suspects {:?}",
                match guard {
                    Some(true) => "violated",
                    Some(false) => "silent",
                    None => "not resolvable at a_min",
                },
                report.suspects.iter().map(|s| (format_sci(s.lo, 4), format_sci(s.hi, 4))).collect::<Vec<_>>()
            ),
        });
    }
    Ok(checks)
}

fn cmd_verify(args: &CommonArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(Defaults::default())?;
    let checks = verification_checks(cfg.seed)?;
    with_output(&cfg, stdout, |w| {
        writeln!(w, "# seed={}", cfg.seed)?;
        for c in &checks {
            writeln!(w, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    })?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Certification(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn cmd_asymptotes(args: &CommonArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(Defaults::default())?;
    let shape = cfg.shape.build()?;
    let spectra = Spectra::load(&cfg, shape, ASYMPTOTE_LAMBDA_MAX)?;
    let set = spectra.asymptotes();
    let mut rows: Vec<(String, f64)> = Vec::new();
    let WeylTerms { area, perimeter, chi } = set.weyl_terms;
    rows.push(("weyl_area_coeff".into(), area));
    rows.push(("weyl_perimeter_coeff".into(), perimeter));
    rows.push(("weyl_chi_coeff".into(), chi));
    for (i, (lambda, m)) in set.far_params.iter().enumerate() {
        rows.push((format!("lambda_{}", i + 1), *lambda));
        rows.push((format!("multiplicity_{}", i + 1), *m as f64));
    }
    let mut offset = 0.0;
    let mut c0 = 0.0;
    let mut c1 = 0.0;
    let mut polygon = true;
    for s in &spectra.spectra {
        match orbit_constants(&shape, s.bc()) {
            Ok(c) => {
                offset += c.force_offset;
                c0 += c.energy_c0;
                c1 += c.energy_c1;
            }
            Err(_) => polygon = false,
        }
    }
    if polygon {
        rows.push(("delta_force_constant".into(), offset));
        rows.push(("delta_energy_c0".into(), c0));
        rows.push(("delta_energy_c1".into(), c1));
    }
    with_output(&cfg, stdout, |w| {
        writeln!(w, "# command=asymptotes")?;
        writeln!(w, "# shape={}", cfg.shape.label())?;
        writeln!(w, "# bc={}", cfg.bc.tag())?;
        writeln!(w, "# version={}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "quantity,value")?;
        for (k, v) in &rows {
            writeln!(w, "{k},{}", format_sci(*v, 10))?;
        }
        Ok(())
    })
}
