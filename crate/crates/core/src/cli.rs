//! Command-line front end: a single JSON run configuration drives every
//! subcommand, and all reports are written with byte-stable formatting.

use std::fs;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::energy::{self, BoundaryDatum, DerivativeReport, EllipticityReport, EnergyDensity, EnergyError};
use crate::exponents::{ExponentBundle, ExponentError, PQExponents, SplitExponents};
use crate::geometry::{build_mesh, DomainMesh, DomainSpec, GeometryError, Point, ScalarField};
use crate::report::{fmt_f64, loglog_svg, to_stable_json, CsvTable, Series};
use crate::solver::{self, SolveResult, SolverConfig, SolverError};
use crate::verify::{
    self, BoundaryGrowth, CaccioppoliForm, CaccioppoliStudy, HoelderVerdict, Problem, StudyReport,
    VerifyError, WeightedIntegralSpec,
};

#[derive(Debug, Parser)]
#[command(name = "anisomin", version, about = "Anisotropic Dirichlet minimizers and their weighted regularity diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thresholds and concrete exponents for the configured theorem.
    Exponents(IoArgs),
    /// Solve at the configured resolution; writes the Newton trace and fields.
    Solve(IoArgs),
    /// Full verification suite.
    Verify(IoArgs),
    /// Hölder coefficients and boundary growth only.
    Holder(IoArgs),
    /// Caccioppoli ratios only.
    Caccioppoli(IoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out_dir` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponents(_) => "exponents",
            Self::Solve(_) => "solve",
            Self::Verify(_) => "verify",
            Self::Holder(_) => "holder",
            Self::Caccioppoli(_) => "caccioppoli",
        }
    }

    pub fn io(&self) -> &IoArgs {
        match self {
            Self::Exponents(a) | Self::Solve(a) | Self::Verify(a) | Self::Holder(a) | Self::Caccioppoli(a) => a,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("verification failed: {0}")]
    Verdict(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Exponent(_) => 2,
            Self::NoConvergence(_) => 3,
            Self::Verdict(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<EnergyError> for CliError {
    fn from(e: EnergyError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Geometry(g) => g.into(),
            SolverError::Energy(g) => g.into(),
            other => Self::NoConvergence(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Exponent(x) => Self::Exponent(x),
            VerifyError::Solver { source, .. } => source.into(),
            VerifyError::DegenerateRhs { .. } => Self::Verdict(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremKind {
    Splitting,
    #[serde(rename = "nosplit2d")]
    NoSplit2D,
    Aniso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    /// Defaults to `splitting` for splitting densities, `nosplit2d` otherwise.
    pub theorem: Option<TheoremKind>,
    pub safety_factor: f64,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub kappa: Option<f64>,
    pub sbar: Option<f64>,
    /// Refinement ladder as grid steps per unit length.
    pub levels: Vec<usize>,
    pub delta: f64,
    /// Splitting-form Caccioppoli weights.
    pub alphas: Vec<f64>,
    /// Full-gradient Caccioppoli weights.
    pub full_alphas: Vec<f64>,
    pub cutoff_m: Vec<u32>,
    pub l: u32,
    pub caccioppoli_levels: Vec<usize>,
    pub max_spread: f64,
    /// Defaults to the finest refinement level.
    pub hoelder_resolution: Option<usize>,
    pub hoelder_points: Vec<Point>,
    pub hoelder_factor: f64,
    pub band_rhos: Vec<f64>,
    pub band_factor: f64,
    pub ellipticity_samples: usize,
    pub derivative_tol: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            theorem: None,
            safety_factor: 1.05,
            t: None,
            s: None,
            kappa: None,
            sbar: None,
            levels: vec![16, 32, 64, 128],
            delta: 0.10,
            alphas: vec![-0.4, -0.25, 0.0],
            full_alphas: vec![-0.2, 0.0],
            cutoff_m: vec![4],
            l: 1,
            caccioppoli_levels: vec![32, 64, 128],
            max_spread: 2.0,
            hoelder_resolution: None,
            hoelder_points: vec![[0.25, 0.5], [0.125, 0.5], [0.0625, 0.5]],
            hoelder_factor: 1.25,
            band_rhos: vec![0.25, 0.125, 0.0625],
            band_factor: 1.5,
            ellipticity_samples: 10_000,
            derivative_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub density: EnergyDensity,
    pub datum: BoundaryDatum,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verification: VerificationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parse and validate; parse errors carry the offending field path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.density.validate()?;
        self.datum.validate()?;
        self.solver.validate().map_err(CliError::Config)?;
        let v = &self.verification;
        verify::check_ladder(&v.levels).map_err(|e| CliError::Config(format!("verification.levels: {e}")))?;
        let positive = [
            ("delta", v.delta),
            ("max_spread", v.max_spread),
            ("hoelder_factor", v.hoelder_factor),
            ("band_factor", v.band_factor),
            ("derivative_tol", v.derivative_tol),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::Config(format!("verification.{name} must be positive, got {x}")));
            }
        }
        if v.cutoff_m.contains(&0) {
            return Err(CliError::Config("verification.cutoff_m entries must be at least 1".into()));
        }
        if v.band_rhos.iter().any(|&r| !(r > 0.0)) {
            return Err(CliError::Config("verification.band_rhos entries must be positive".into()));
        }
        self.bundle()?;
        Ok(())
    }

    pub fn theorem(&self) -> TheoremKind {
        self.verification.theorem.unwrap_or(match self.density {
            EnergyDensity::Splitting { .. } => TheoremKind::Splitting,
            EnergyDensity::PQGrowth { .. } => TheoremKind::NoSplit2D,
        })
    }

    pub fn bundle(&self) -> Result<ExponentBundle, CliError> {
        let v = &self.verification;
        let mut bundle = match (self.theorem(), self.density) {
            (TheoremKind::Splitting, EnergyDensity::Splitting { q1, q2 }) => {
                let mut b = ExponentBundle::splitting(&SplitExponents::new(q1, q2)?, v.safety_factor)?;
                if let Some(t) = v.t {
                    b.t = Some(t);
                }
                b
            }
            (TheoremKind::NoSplit2D, EnergyDensity::PQGrowth { p, q, .. }) => {
                ExponentBundle::nosplit(&PQExponents::new(2, p, q)?, v.s, v.safety_factor)?
            }
            (TheoremKind::Aniso, EnergyDensity::PQGrowth { p, q, .. }) => {
                ExponentBundle::aniso(&PQExponents::new(2, p, q)?, v.kappa, v.sbar, v.safety_factor)?
            }
            (th, d) => {
                return Err(CliError::Config(format!(
                    "verification.theorem: {th:?} does not apply to density {d:?}"
                )))
            }
        };
        if let Some(k) = v.kappa {
            bundle.kappa = k;
        }
        Ok(bundle)
    }

    pub fn spec(&self) -> Result<WeightedIntegralSpec, CliError> {
        Ok(WeightedIntegralSpec::from_bundle(&self.density, &self.bundle()?)?)
    }

    pub fn problem(&self) -> Problem {
        Problem {
            domain: self.domain,
            density: self.density,
            datum: self.datum.clone(),
            solver: self.solver,
        }
    }

    /// Smallest growth exponent, the one entering the Hölder exponents.
    pub fn qmin(&self) -> f64 {
        match self.density {
            EnergyDensity::Splitting { q1, q2 } => q1.min(q2),
            EnergyDensity::PQGrowth { p, .. } => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityChecks {
    pub derivative: Option<DerivativeReport>,
    pub ellipticity: Option<EllipticityReport>,
    pub failures: Vec<String>,
    pub passed: bool,
}

pub fn density_checks(cfg: &RunConfig) -> DensityChecks {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut failures = Vec::new();
    let derivative = energy::derivative_consistency(&cfg.density, cfg.verification.derivative_tol, &mut rng)
        .map_err(|e| failures.push(e.to_string()))
        .ok();
    let ellipticity = energy::ellipticity_check(&cfg.density, cfg.verification.ellipticity_samples, &mut rng)
        .map_err(|e| failures.push(e.to_string()))
        .ok();
    DensityChecks {
        derivative,
        ellipticity,
        passed: failures.is_empty(),
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub resolution: usize,
    pub qmin: f64,
    pub kappa: f64,
    pub hoelder: Option<HoelderVerdict>,
    pub boundary_growth: BoundaryGrowth,
}

pub fn holder_report(cfg: &RunConfig) -> Result<HolderReport, CliError> {
    let v = &cfg.verification;
    let resolution = v
        .hoelder_resolution
        .unwrap_or_else(|| *v.levels.iter().max().expect("validated ladder"));
    let level = cfg.problem().solve_at(resolution)?;
    let (qmin, kappa) = (cfg.qmin(), cfg.bundle()?.kappa);
    let hoelder = if v.hoelder_points.is_empty() {
        None
    } else {
        let samples = verify::hoelder_coefficient(&level.mesh, &level.result.u, qmin, kappa, &v.hoelder_points)?;
        Some(verify::hoelder_verdict(qmin, kappa, samples, v.hoelder_factor))
    };
    let boundary_growth =
        verify::boundary_growth(&level.mesh, &level.result.u, &level.u0, qmin, &v.band_rhos, v.band_factor);
    Ok(HolderReport {
        resolution,
        qmin,
        kappa,
        hoelder,
        boundary_growth,
    })
}

pub fn caccioppoli_reports(cfg: &RunConfig) -> Result<Vec<CaccioppoliStudy>, CliError> {
    let v = &cfg.verification;
    let cases: Vec<(CaccioppoliForm, f64)> = v
        .alphas
        .iter()
        .map(|&a| (CaccioppoliForm::Splitting, a))
        .chain(v.full_alphas.iter().map(|&a| (CaccioppoliForm::FullGradient, a)))
        .collect();
    if cases.is_empty() {
        return Ok(Vec::new());
    }
    let problem = cfg.problem();
    v.cutoff_m
        .iter()
        .map(|&m| Ok(verify::caccioppoli_study(&problem, &cases, m, v.l, &v.caccioppoli_levels, v.max_spread)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub density: bool,
    pub bounded: bool,
    pub euler: bool,
    pub hoelder: bool,
    pub boundary_growth: bool,
    pub caccioppoli: bool,
    pub all: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: &'static str,
    pub seed: u64,
    pub exponents: ExponentBundle,
    pub density_checks: DensityChecks,
    pub refinement: StudyReport,
    pub holder: HolderReport,
    pub caccioppoli: Vec<CaccioppoliStudy>,
    pub verdicts: Verdicts,
}

pub fn verification_report(cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    let exponents = cfg.bundle()?;
    let spec = WeightedIntegralSpec::from_bundle(&cfg.density, &exponents)?;
    let density_checks = density_checks(cfg);
    let v = &cfg.verification;
    let refinement = verify::refinement_study(&cfg.problem(), &spec, &v.levels, v.delta)?;
    let holder = holder_report(cfg)?;
    let caccioppoli = caccioppoli_reports(cfg)?;
    let mut verdicts = Verdicts {
        density: density_checks.passed,
        bounded: refinement.verdict.bounded,
        euler: refinement
            .rows
            .iter()
            .all(|r| r.euler_residual <= cfg.solver.grad_tol),
        hoelder: holder.hoelder.as_ref().is_none_or(|h| h.passed),
        boundary_growth: holder.boundary_growth.passed,
        caccioppoli: caccioppoli.iter().all(|c| c.passed),
        all: false,
    };
    verdicts.all = verdicts.density
        && verdicts.bounded
        && verdicts.euler
        && verdicts.hoelder
        && verdicts.boundary_growth
        && verdicts.caccioppoli;
    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        exponents,
        density_checks,
        refinement,
        holder,
        caccioppoli,
        verdicts,
    })
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: PathBuf) -> io::Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(&mut self, rel: &str, contents: &[u8]) -> io::Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> io::Result<()> {
        let text = to_stable_json(value).map_err(io::Error::other)?;
        self.write(rel, text.as_bytes())
    }

    fn manifest(mut self, command: &str, config_bytes: &[u8], seed: u64) -> io::Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            artifact_version: &'static str,
            command: &'a str,
            config_sha256: String,
            seed: u64,
            files: Vec<String>,
        }
        let digest = Sha256::digest(config_bytes);
        let mut files = self.files.clone();
        files.sort();
        let m = Manifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            files,
        };
        self.json("manifest.json", &m)
    }
}

fn trace_csv(result: &SolveResult) -> String {
    let mut t = CsvTable::new(&["iteration", "energy", "grad_norm", "step"]);
    for r in &result.trace {
        t.push(vec![r.iteration.to_string(), fmt_f64(r.energy), fmt_f64(r.grad_norm), fmt_f64(r.step)]);
    }
    t.to_string()
}

fn field_csv(mesh: &DomainMesh, field: &ScalarField) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    mesh.write_field_csv(field, &mut buf)?;
    Ok(buf)
}

fn write_solution(out: &mut Output, mesh: &DomainMesh, u0: &ScalarField, result: &SolveResult) -> io::Result<()> {
    out.write("solve_trace.csv", trace_csv(result).as_bytes())?;
    let mut mesh_buf = Vec::new();
    mesh.write_mesh_csv(&mut mesh_buf)?;
    out.write("fields/mesh.csv", &mesh_buf)?;
    out.write("fields/u.csv", &field_csv(mesh, &result.u)?)?;
    out.write("fields/u0.csv", &field_csv(mesh, u0)?)?;
    let diff = result.u.zip_map(u0, |a, b| a - b);
    out.write("fields/u_minus_u0.csv", &field_csv(mesh, &diff)?)
}

fn levels_csv(study: &StudyReport) -> String {
    let mut t = CsvTable::new(&[
        "resolution",
        "h",
        "weighted_integral",
        "energy",
        "newton_iters",
        "grad_norm",
        "euler_residual",
        "sup_u_minus_u0",
    ]);
    for r in &study.rows {
        t.push(vec![
            r.resolution.to_string(),
            fmt_f64(r.h),
            fmt_f64(r.weighted_integral),
            fmt_f64(r.energy),
            r.newton_iters.to_string(),
            fmt_f64(r.grad_norm),
            fmt_f64(r.euler_residual),
            fmt_f64(r.sup_u_minus_u0),
        ]);
    }
    t.to_string()
}

fn caccioppoli_csv(studies: &[CaccioppoliStudy]) -> String {
    let mut t = CsvTable::new(&["m", "form", "alpha", "resolution", "lhs", "rhs", "ratio"]);
    for s in studies {
        for r in &s.rows {
            let form = match r.form {
                CaccioppoliForm::Splitting => "splitting",
                CaccioppoliForm::FullGradient => "full_gradient",
            };
            t.push(vec![
                s.cutoff_m.to_string(),
                form.to_string(),
                fmt_f64(r.alpha),
                r.resolution.to_string(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.ratio),
            ]);
        }
    }
    t.to_string()
}

fn caccioppoli_svg(studies: &[CaccioppoliStudy]) -> String {
    let mut labels = Vec::new();
    let mut points = Vec::new();
    for s in studies {
        for series in &s.series {
            labels.push(format!("m={} {:?} a={}", s.cutoff_m, series.form, series.alpha));
            let pts = s
                .rows
                .iter()
                .filter(|r| r.form == series.form && r.alpha == series.alpha)
                .map(|r| (1.0 / r.resolution as f64, r.ratio))
                .collect::<Vec<_>>();
            points.push(pts);
        }
    }
    let series: Vec<Series> = labels
        .iter()
        .zip(points)
        .map(|(label, points)| Series { label, points })
        .collect();
    loglog_svg("Caccioppoli ratio", "h", "ratio", &series)
}

fn holder_svg(report: &HolderReport) -> String {
    let mut series = Vec::new();
    if let Some(h) = &report.hoelder {
        series.push(Series {
            label: "coefficient",
            points: h.samples.iter().map(|s| (s.dist, s.coefficient)).collect(),
        });
        series.push(Series {
            label: "coefficient * d^(zeta-1)",
            points: h.samples.iter().map(|s| (s.dist, s.product)).collect(),
        });
    }
    series.push(Series {
        label: "sup |u-u0| on d <= rho",
        points: report.boundary_growth.bands.clone(),
    });
    loglog_svg("Hölder and boundary growth", "d, rho", "value", &series)
}

fn read_config(args: &IoArgs) -> Result<(RunConfig, Vec<u8>, PathBuf), CliError> {
    let bytes = fs::read(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
    let cfg = RunConfig::from_json(text)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set out_dir".into()))?;
    Ok((cfg, bytes, out))
}

/// Run one subcommand; the error carries the process exit code.
pub fn run(command: &Command) -> Result<(), CliError> {
    let (cfg, bytes, dir) = read_config(command.io())?;
    let mut out = Output::new(dir)?;
    let outcome = match command {
        Command::Exponents(_) => {
            out.json("exponents.json", &cfg.bundle()?)?;
            Ok(())
        }
        Command::Solve(_) => run_solve(&cfg, &mut out),
        Command::Verify(_) => run_verify(&cfg, &mut out),
        Command::Holder(_) => {
            let report = holder_report(&cfg)?;
            out.json("holder.json", &report)?;
            out.write("plots/hoelder.svg", holder_svg(&report).as_bytes())?;
            let passed = report.hoelder.as_ref().is_none_or(|h| h.passed) && report.boundary_growth.passed;
            verdict(passed, "Hölder or boundary-growth check")
        }
        Command::Caccioppoli(_) => {
            let studies = caccioppoli_reports(&cfg)?;
            out.json("caccioppoli.json", &studies)?;
            out.write("caccioppoli.csv", caccioppoli_csv(&studies).as_bytes())?;
            out.write("plots/caccioppoli.svg", caccioppoli_svg(&studies).as_bytes())?;
            verdict(studies.iter().all(|s| s.passed), "Caccioppoli ratio spread")
        }
    };
    out.manifest(command.name(), &bytes, cfg.seed)?;
    outcome
}

fn verdict(passed: bool, what: &str) -> Result<(), CliError> {
    if passed {
        Ok(())
    } else {
        Err(CliError::Verdict(what.to_string()))
    }
}

fn run_solve(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let mesh = build_mesh(&cfg.domain)?;
    let u0 = cfg.datum.nodal(&mesh)?;
    match solver::solve_from(&mesh, &cfg.density, &u0, solver::InitialGuess::Interpolated, &cfg.solver) {
        Ok(result) => {
            write_solution(out, &mesh, &u0, &result)?;
            Ok(())
        }
        Err(SolverError::NoConvergence { reason, best }) => {
            write_solution(out, &mesh, &u0, &best)?;
            Err(CliError::NoConvergence(reason))
        }
        Err(e) => Err(e.into()),
    }
}

fn run_verify(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let report = verification_report(cfg)?;
    out.json("exponents.json", &report.exponents)?;
    out.json("verification.json", &report)?;
    out.write("levels.csv", levels_csv(&report.refinement).as_bytes())?;
    out.write("caccioppoli.csv", caccioppoli_csv(&report.caccioppoli).as_bytes())?;
    let w = Series {
        label: "W",
        points: report
            .refinement
            .rows
            .iter()
            .map(|r| (r.h, r.weighted_integral))
            .collect(),
    };
    out.write("plots/weighted_integral.svg", loglog_svg("Weighted integral", "h", "W", &[w]).as_bytes())?;
    out.write("plots/hoelder.svg", holder_svg(&report.holder).as_bytes())?;
    out.write("plots/caccioppoli.svg", caccioppoli_svg(&report.caccioppoli).as_bytes())?;
    let v = &report.verdicts;
    if v.all {
        return Ok(());
    }
    let failed: Vec<&str> = [
        ("density", v.density),
        ("bounded", v.bounded),
        ("euler", v.euler),
        ("hoelder", v.hoelder),
        ("boundary_growth", v.boundary_growth),
        ("caccioppoli", v.caccioppoli),
    ]
    .iter()
    .filter(|(_, ok)| !ok)
    .map(|(name, _)| *name)
    .collect();
    Err(CliError::Verdict(failed.join(", ")))
}

/// Cap the global thread pool from `ANISOMIN_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ANISOMIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("ANISOMIN_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
