//! Command-line front end: configuration, pipelines and JSON run reports.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use homsol_core::classifier::{self, ClassifyOptions, Family};
use homsol_core::homogeneous::HomogeneousFunction;
use homsol_core::hunter::{self, HuntConfig};
use homsol_core::operators::parse_operator_spec;
use homsol_core::poly::FloatPoly;
use homsol_core::sphere::{self, SphereGrid};
use homsol_core::verifier::{self, ResidualReport, SampleSet};
use homsol_core::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "HOMSOL_THREADS";

/// Relative gap that separates eigenvalue clusters in spectrum reports.
pub const CLUSTER_GAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Verify,
    Spectrum,
    Hunt,
}

/// Everything a run depends on. A report embeds this, and rerunning it
/// reproduces the report's numerical fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: Command,
    pub operator: String,
    pub n: usize,
    pub d: Option<f64>,
    pub poly: Option<String>,
    pub tol: f64,
    /// |F(0)| above this means no homogeneous solutions.
    pub f_zero_tol: f64,
    /// DF(0) must have smallest eigenvalue above this.
    pub ellipticity_floor: f64,
    pub seed: u64,
    pub samples: usize,
    pub grid: Option<String>,
    pub k: usize,
    pub lmax: u32,
    pub seeds: usize,
    pub max_iters: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Classify,
            operator: "speclag:c=0".into(),
            n: 3,
            d: None,
            poly: None,
            tol: verifier::EQUATION_TOL,
            f_zero_tol: ClassifyOptions::default().f_zero_tol,
            ellipticity_floor: ClassifyOptions::default().ellipticity_floor,
            seed: verifier::DEFAULT_SEED,
            samples: verifier::DEFAULT_SAMPLES,
            grid: None,
            k: 20,
            lmax: 4,
            seeds: 10,
            max_iters: 2000,
            out: None,
        }
    }
}

impl RunConfig {
    /// Default grid: 48×96 on S², 128 points on S¹.
    pub fn grid_spec(&self) -> String {
        match (&self.grid, self.n) {
            (Some(g), _) => g.clone(),
            (None, 2) => "128".into(),
            (None, _) => "48x96".into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "homsol", version, about = "Homogeneous solutions of fully nonlinear elliptic equations")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Classify the degree-d homogeneous solutions of F(D²u) = 0.
    Classify(Flags),
    /// Check a homogeneous polynomial against F and its linearization.
    Verify(Flags),
    /// Lowest eigenvalues of the discrete Laplace–Beltrami operator.
    Spectrum(Flags),
    /// Residual minimization over truncated harmonic profiles.
    Hunt(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Operator spec, e.g. speclag:c=0 or linear:A=[[2,0],[0,1]]
    #[arg(long = "op")]
    operator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    /// Polynomial in x1..xn (verify)
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    f_zero_tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    ellipticity_floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// m (circle) or NLATxNLON (sphere)
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lmax: Option<u32>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a run ended; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Classification(Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Classification(_) => 2,
            Failure::Usage(_) | Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Classification(e) => write!(f, "classification error: {e}"),
            Failure::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_classification_error() {
            Failure::Classification(e)
        } else {
            match e {
                Error::Parse { .. } | Error::ConfigInvalid(_) | Error::InvalidOperator(_) | Error::NotSpd { .. } => {
                    Failure::Usage(format!("error: {e}"))
                }
                other => Failure::Runtime(other.into()),
            }
        }
    }
}

/// Parses argv into a RunConfig, reading `--config` first.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure::Usage(e.render().to_string()))?;
    let (command, flags) = match cli.command {
        CliCommand::Classify(f) => (Command::Classify, f),
        CliCommand::Verify(f) => (Command::Verify, f),
        CliCommand::Spectrum(f) => (Command::Spectrum, f),
        CliCommand::Hunt(f) => (Command::Hunt, f),
    };
    let mut cfg = match &flags.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    cfg.command = command;
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = flags.$field { cfg.$field = v; } )* };
    }
    take!(operator, n, tol, f_zero_tol, ellipticity_floor, seed, samples, k, lmax, seeds, max_iters);
    if flags.d.is_some() {
        cfg.d = flags.d;
    }
    if flags.poly.is_some() {
        cfg.poly = flags.poly;
    }
    if flags.grid.is_some() {
        cfg.grid = flags.grid;
    }
    if flags.out.is_some() {
        cfg.out = flags.out;
    }
    Ok(cfg)
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
    // a full report is accepted as a config
    let value = match value.get("config") {
        Some(inner) if value.get("version").is_some() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

/// A finished run: the JSON report and a short human summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (body_key, body, diagnostics, residuals, summary) = match cfg.command {
        Command::Classify => run_classify(cfg)?,
        Command::Verify => run_verify(cfg)?,
        Command::Spectrum => run_spectrum(cfg)?,
        Command::Hunt => run_hunt(cfg)?,
    };
    let mut report = json!({
        "version": VERSION,
        "config": cfg,
        "diagnostics": diagnostics,
        "residuals": residuals,
    });
    if let Some(key) = body_key {
        report[key] = body;
    }
    Ok(Outcome { report, summary })
}

type Sections = (Option<&'static str>, Value, Value, Value, String);

fn require_d(cfg: &RunConfig) -> Result<f64, Failure> {
    cfg.d.ok_or_else(|| Failure::Usage(format!("{:?} needs --d", cfg.command).to_lowercase()))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Runtime(e.into()))
}

fn run_classify(cfg: &RunConfig) -> Result<Sections, Failure> {
    let d = require_d(cfg)?;
    let f = parse_operator_spec(&cfg.operator, cfg.n)?;
    let opts = ClassifyOptions {
        f_zero_tol: cfg.f_zero_tol,
        ellipticity_floor: cfg.ellipticity_floor,
        seed: cfg.seed,
        ..ClassifyOptions::default()
    };
    let report = classifier::classify(&f, cfg.n, d, &opts)?;
    let samples = SampleSet::annulus(cfg.n, cfg.samples, cfg.seed)?;
    let mut residuals = BTreeMap::new();
    for (i, u) in report.elements()?.iter().enumerate() {
        residuals.insert(format!("element_{i}"), verifier::residual_sup(u, &f, &samples)?);
    }
    let diagnostics = json!({
        "linearization": report.linearization,
        "mu_estimate": report.mu_estimate,
        "f_at_zero": report.f_at_zero,
        "elements": report.diagnostics,
    });
    let mut summary = format!("{} (n = {}, d = {}): {}", f, cfg.n, d, report.family.name());
    match &report.family {
        Family::NoSolutions { reason } | Family::ZeroOnly { reason } => summary.push_str(&format!(" ({reason})")),
        family => {
            summary.push_str(&format!(", {} elements", family.len()));
            let worst = residuals.values().map(|r| r.sup_residual).fold(0.0, f64::max);
            summary.push_str(&format!(", worst sampled |F(D²u)| = {worst:.3e}"));
        }
    }
    Ok((Some("family"), to_value(&report.family)?, diagnostics, to_value(&residuals)?, summary))
}

fn run_verify(cfg: &RunConfig) -> Result<Sections, Failure> {
    let text = cfg
        .poly
        .as_deref()
        .ok_or_else(|| Failure::Usage("verify needs --poly".into()))?;
    let f = parse_operator_spec(&cfg.operator, cfg.n)?;
    let p = FloatPoly::parse(text, Some(cfg.n))?;
    let u = match cfg.d {
        Some(d) => HomogeneousFunction::polynomial_with_degree(p, d)?,
        None => HomogeneousFunction::from_polynomial(p)?,
    };
    let a = classifier::linearize_at_zero(&f)?;
    let samples = SampleSet::annulus(cfg.n, cfg.samples, cfg.seed)?;
    let thetas = SampleSet::unit_sphere(cfg.n, cfg.samples, cfg.seed)?;
    let mut residuals: BTreeMap<&str, ResidualReport> = BTreeMap::new();
    residuals.insert("equation", verifier::residual_sup(&u, &f, &samples)?);
    residuals.insert("homogeneity", verifier::verify_homogeneity(&u, u.degree(), &samples)?);
    residuals.insert("linearized", verifier::verify_linearized(&u, &a, &samples)?);
    residuals.insert("eigen_relation", verifier::verify_eigen_relation(&u, &thetas)?);
    let sup = residuals["equation"].sup_residual;
    let passed = sup < cfg.tol;
    let diagnostics = json!({
        "degree": u.degree(),
        "lambda": u.lambda(),
        "linearization": a,
        "passed": passed,
    });
    let summary = format!(
        "{} with {}: sup |F(D²u)| = {sup:.3e} over {} samples, {}",
        text,
        f,
        cfg.samples,
        if passed { "PASS" } else { "FAIL" }
    );
    Ok((None, Value::Null, diagnostics, to_value(&residuals)?, summary))
}

fn run_spectrum(cfg: &RunConfig) -> Result<Sections, Failure> {
    let grid = SphereGrid::from_spec(cfg.n, &cfg.grid_spec())?;
    let lb = sphere::build_lb(grid)?;
    let values = sphere::lowest_eigenvalues(&lb, cfg.k)?;
    let clusters = sphere::cluster_eigenvalues(&values, CLUSTER_GAP);
    let m = (cfg.n - 2) as f64;
    let errors: Vec<Value> = clusters
        .iter()
        .map(|c| {
            // nearest ℓ(ℓ + n − 2)
            let ell = (0.5 * (-m + (m * m + 4.0 * c.value.max(0.0)).sqrt())).round();
            let exact = ell * (ell + m);
            json!({
                "ell": ell as u32,
                "exact": exact,
                "discrete": c.value,
                "relative_error": (c.value - exact).abs() / exact.max(1.0),
            })
        })
        .collect();
    let spectrum = json!({
        "grid": grid,
        "eigenvalues": values,
        "clusters": clusters,
    });
    let diagnostics = json!({
        "points": grid.len(),
        "symmetry_defect": lb.symmetry_defect(),
    });
    let distinct: Vec<String> = clusters.iter().map(|c| format!("{:.4} (x{})", c.value, c.multiplicity)).collect();
    let summary = format!("spectrum on {} ({} points): {}", cfg.grid_spec(), grid.len(), distinct.join(", "));
    Ok((Some("spectrum"), spectrum, diagnostics, json!({ "clusters": errors }), summary))
}

fn run_hunt(cfg: &RunConfig) -> Result<Sections, Failure> {
    let hc = HuntConfig {
        operator: cfg.operator.clone(),
        n: cfg.n,
        d: cfg.d.unwrap_or(HuntConfig::default().d),
        lmax: cfg.lmax,
        seeds: cfg.seeds,
        rng_seed: HuntConfig::default().rng_seed,
        sample_seed: cfg.seed,
        max_iters: cfg.max_iters,
        ..HuntConfig::default()
    };
    let results = hunter::hunt(&hc)?;
    let best = results
        .iter()
        .min_by(|a, b| a.best_residual.total_cmp(&b.best_residual))
        .expect("at least one seed");
    let residuals: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "seed_index": r.seed_index,
                "best_residual": r.best_residual,
                "sup_residual": r.sup_residual,
                "distance_to_harmonic": r.distance_to_harmonic,
            })
        })
        .collect();
    let diagnostics = json!({
        "hunt_config": hc,
        "best_seed": best.seed_index,
        "best_residual": best.best_residual,
        "exploratory": hc.exploratory(),
    });
    let mut summary = format!(
        "hunt {} (n = {}, d = {}, lmax = {}, {} seeds): best RMS residual {:.3e} at seed {}, distance to harmonic {:.3e}",
        hc.operator, hc.n, hc.d, hc.lmax, hc.seeds, best.best_residual, best.seed_index, best.distance_to_harmonic
    );
    if hc.exploratory() {
        summary.push_str(" [exploratory: d = 2 lies outside the classification]");
    }
    Ok((Some("hunt_results"), to_value(&results)?, diagnostics, Value::Array(residuals), summary))
}

/// Sets the global rayon pool from `HOMSOL_THREADS`; unset or 0 means automatic.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got {raw:?}")))?;
    if threads > 0 {
        // a second call within one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

pub fn write_report(path: &Path, report: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text + "\n").with_context(|| format!("writing report to {}", path.display()))
}

/// Runs one command line, returning the exit code. With `--out` the JSON goes
/// to that file and the summary to stdout; without it the JSON goes to stdout
/// and the summary to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_inner(argv) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("{failure}");
            failure.exit_code()
        }
    }
}

fn run_inner<I, T>(argv: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_config(argv)?;
    configure_threads()?;
    let outcome = execute(&cfg)?;
    match &cfg.out {
        Some(path) => {
            write_report(path, &outcome.report).map_err(Failure::Runtime)?;
            println!("{}", outcome.summary);
            println!("report written to {}", path.display());
        }
        None => {
            let text = serde_json::to_string_pretty(&outcome.report).map_err(|e| Failure::Runtime(e.into()))?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::Runtime(anyhow!(e)))?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}
