//! Batch front end over `cesaro-core`.
//!
//! Every command writes its table (CSV or JSON) to `--out` or stdout. With CSV
//! and `--out`, a JSON sidecar holding the config echo, versions and reports is
//! written next to it as `<out>.json`.

pub mod spec;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use cesaro_core::fbm::{self, CovarianceReport, FbmConfig, Mode, MIN_PATHS_FOR_COVARIANCE};
use cesaro_core::kernels::{self, KernelSpec, Strategy};
use cesaro_core::laplace::checks::{bound_sweep, default_lattice, BoundReport};
use cesaro_core::verify::{self, SuiteResult, VerifyOptions, VerifyReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use spec::{parse_list, GridSpec, PolarSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// A rejected flag, reported before any computation starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub flag: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(flag: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError { flag: flag.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.flag, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Numeric(#[from] cesaro_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Serialize(_) => EXIT_FAILURES,
        }
    }
}

fn config_err(flag: &str) -> impl Fn(cesaro_core::Error) -> CliError + '_ {
    move |e| CliError::Config(ConfigError::new(flag, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    B,
    N,
}

#[derive(Debug, Parser)]
#[command(name = "cesaro", version, about = "Cesaro kernels, bound sweeps, fBm sampling and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// k_a, n_a and b_(a-1) over the grid product.
    KernelTable {
        #[arg(long)]
        alpha: f64,
        /// start:stop:count:{lin|log}
        #[arg(long)]
        grid: String,
        /// Comma list of hyp, int, quad.
        #[arg(long, default_value = "hyp")]
        strategy: String,
        #[command(flatten)]
        output: Output,
    },
    /// Half-plane diagonal kernel against its proved bounds.
    BoundsSweep {
        /// Comma list of orders; the default lattice orders when absent.
        #[arg(long)]
        alpha: Option<String>,
        /// mod-start:mod-stop:count/theta-count; the default lattice when absent.
        #[arg(long)]
        polar: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded fBm paths with a covariance report.
    Fbm {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "b")]
        mode: ModeArg,
        /// Emit the order-`a` averages of the paths instead of the paths.
        #[arg(long)]
        average: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Every property suite.
    Verify {
        /// Scale applied to every suite tolerance; 0.01 tightens 100x.
        #[arg(long, default_value_t = 1.0)]
        tolerance: f64,
        /// Comma list of suites to run; all when absent.
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub cesaro_core: String,
    pub cesaro_cli: String,
}

impl Versions {
    pub fn current() -> Versions {
        Versions { cesaro_core: cesaro_core::VERSION.into(), cesaro_cli: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTableConfig {
    pub alpha: f64,
    pub grid: GridSpec,
    pub strategies: Vec<Strategy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub s: f64,
    pub t: f64,
    /// One value per requested strategy, in order.
    pub k: Vec<f64>,
    pub n: f64,
    /// `b_(a-1)`, present for `a >= 1`.
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTableDoc {
    pub command: String,
    pub config: KernelTableConfig,
    pub versions: Versions,
    pub columns: Vec<String>,
    pub rows: Vec<KernelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub alphas: Vec<f64>,
    pub moduli: Vec<f64>,
    pub thetas: Vec<f64>,
    pub polar: Option<PolarSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub command: String,
    pub config: BoundsConfig,
    pub versions: Versions,
    pub failures: usize,
    pub rows: Vec<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averaging {
    pub alpha: f64,
    pub discretization_bound: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmDoc {
    pub command: String,
    pub config: FbmConfig,
    pub grid_spec: GridSpec,
    pub versions: Versions,
    pub jitter: f64,
    /// Of the raw paths, present when there are enough of them.
    pub covariance: Option<CovarianceReport>,
    pub averaging: Option<Averaging>,
    /// Only in the JSON format; CSV carries them in the table.
    pub samples: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub command: String,
    pub versions: Versions,
    pub report: VerifyReport,
}

/// Header plus rows of already formatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(w: W, table: &Table) -> Result<(), CliError> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    wr.write_record(&table.header).map_err(err)?;
    for r in &table.rows {
        wr.write_record(r).map_err(err)?;
    }
    wr.flush().map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(doc).map(|s| s + "\n").map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(s: &str) -> Result<T, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::Serialize(e.to_string()))
}

/// `<out>.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Writes the table or document to the destination, plus the sidecar for CSV files.
fn emit<T: Serialize>(output: &Output, default: Format, table: impl FnOnce() -> Table, doc: &T) -> Result<(), CliError> {
    let json = to_json(doc)?;
    match (output.format.unwrap_or(default), &output.out) {
        (Format::Json, Some(p)) => write_file(p, json.as_bytes()),
        (Format::Json, None) => io::stdout().write_all(json.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source }),
        (Format::Csv, Some(p)) => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &table())?;
            write_file(p, &buf)?;
            write_file(&sidecar_path(p), json.as_bytes())
        }
        (Format::Csv, None) => write_csv(io::stdout().lock(), &table()),
    }
}

fn check_output(output: &Output) -> Result<(), CliError> {
    if let Some(p) = &output.out {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(ConfigError::new("--out", format!("directory {} does not exist", dir.display())).into());
        }
    }
    Ok(())
}

pub fn parse_strategies(s: &str) -> Result<Vec<Strategy>, ConfigError> {
    let mut out = Vec::new();
    for tag in s.split(',').map(str::trim) {
        let st = match tag {
            "hyp" => Strategy::Hypergeometric,
            "int" => Strategy::IntegerSum,
            "quad" => Strategy::QuadratureOracle,
            _ => return Err(ConfigError::new("--strategy", format!("unknown strategy {tag:?}, expected hyp, int or quad"))),
        };
        if out.contains(&st) {
            return Err(ConfigError::new("--strategy", format!("{tag} given twice")));
        }
        out.push(st);
    }
    Ok(out)
}

/// Runs one command; the returned value is the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::KernelTable { alpha, grid, strategy, output } => kernel_table(alpha, &grid, &strategy, &output),
        Command::BoundsSweep { alpha, polar, output } => bounds_sweep(alpha.as_deref(), polar.as_deref(), &output),
        Command::Fbm { alpha, grid, paths, seed, mode, average, output } => {
            let mode = match mode {
                ModeArg::B => Mode::BProcess,
                ModeArg::N => Mode::NProcess,
            };
            fbm_cmd(alpha, &grid, paths, seed, mode, average, &output)
        }
        Command::Verify { tolerance, suite, output } => verify_cmd(tolerance, suite.as_deref(), &output),
    }
}

pub fn kernel_table_doc(alpha: f64, grid: &str, strategy: &str) -> Result<KernelTableDoc, CliError> {
    let grid: GridSpec = grid.parse()?;
    let strategies = parse_strategies(strategy)?;
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(ConfigError::new("--alpha", format!("the kernel needs a > 1/2, got {alpha}")).into());
    }
    let specs: Vec<KernelSpec> =
        strategies.iter().map(|&s| KernelSpec::new(alpha, s)).collect::<Result<_, _>>().map_err(config_err("--strategy"))?;
    let points = grid.points()?;
    kernels::validate_grid(&points, kernels::MAX_GRID).map_err(config_err("--grid"))?;

    let mut columns = vec!["s".to_string(), "t".to_string()];
    columns.extend(strategies.iter().map(|s| format!("k_{}[a={alpha}]", s.tag())));
    columns.push(format!("n[a={alpha}]"));
    columns.push(format!("b[a={}]", alpha - 1.0));
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &s in &points {
        for &t in &points {
            let k = specs.iter().map(|&sp| kernels::kernel_k(sp, s, t)).collect::<Result<Vec<_>, _>>()?;
            let n = kernels::covariance_n(alpha, s, t)?;
            let b = if alpha >= 1.0 { Some(kernels::covariance_b(alpha - 1.0, s, t)?) } else { None };
            rows.push(KernelRow { s, t, k, n, b });
        }
    }
    Ok(KernelTableDoc {
        command: "kernel-table".into(),
        config: KernelTableConfig { alpha, grid, strategies },
        versions: Versions::current(),
        columns,
        rows,
    })
}

impl KernelTableDoc {
    pub fn table(&self) -> Table {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![fmt_f64(r.s), fmt_f64(r.t)];
                v.extend(r.k.iter().map(|&k| fmt_f64(k)));
                v.push(fmt_f64(r.n));
                v.push(fmt_opt(r.b));
                v
            })
            .collect();
        Table { header: self.columns.clone(), rows }
    }
}

fn kernel_table(alpha: f64, grid: &str, strategy: &str, output: &Output) -> Result<i32, CliError> {
    check_output(output)?;
    let doc = kernel_table_doc(alpha, grid, strategy)?;
    emit(output, Format::Csv, || doc.table(), &doc)?;
    Ok(EXIT_OK)
}

pub fn bounds_doc(alpha: Option<&str>, polar: Option<&str>) -> Result<BoundsDoc, CliError> {
    let (def_alphas, def_thetas, def_moduli) = default_lattice();
    let alphas = match alpha {
        Some(s) => parse_list("--alpha", s)?,
        None => def_alphas,
    };
    for &a in &alphas {
        if !(a > 0.0) || !a.is_finite() {
            return Err(ConfigError::new("--alpha", format!("orders must be positive, got {a}")).into());
        }
    }
    let polar: Option<PolarSpec> = polar.map(str::parse).transpose()?;
    let (moduli, thetas) = match &polar {
        Some(p) => (p.moduli()?, p.thetas()?),
        None => (def_moduli, def_thetas),
    };
    let rows = bound_sweep(&alphas, &thetas, &moduli)?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(BoundsDoc {
        command: "bounds-sweep".into(),
        config: BoundsConfig { alphas, moduli, thetas, polar },
        versions: Versions::current(),
        failures,
        rows,
    })
}

impl BoundsDoc {
    pub fn table(&self) -> Table {
        let header = ["alpha", "modulus", "theta", "k", "k_error", "lower", "upper", "pass"];
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v: Vec<String> =
                    [r.alpha, r.modulus, r.theta, r.value, r.error, r.lower, r.upper].iter().map(|&x| fmt_f64(x)).collect();
                v.push(r.pass.to_string());
                v
            })
            .collect();
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows }
    }
}

fn bounds_sweep(alpha: Option<&str>, polar: Option<&str>, output: &Output) -> Result<i32, CliError> {
    check_output(output)?;
    let doc = bounds_doc(alpha, polar)?;
    emit(output, Format::Csv, || doc.table(), &doc)?;
    if doc.failures > 0 {
        eprintln!("{} of {} rows violate their bounds", doc.failures, doc.rows.len());
        return Ok(EXIT_FAILURES);
    }
    Ok(EXIT_OK)
}

pub fn fbm_doc(
    alpha: f64,
    grid: &str,
    paths: usize,
    seed: u64,
    mode: Mode,
    average: Option<f64>,
) -> Result<(FbmDoc, Vec<Vec<f64>>), CliError> {
    let grid_spec: GridSpec = grid.parse()?;
    let bad_alpha = match mode {
        Mode::BProcess => !(alpha >= 0.0),
        Mode::NProcess => !(alpha > 0.5),
    };
    if bad_alpha || !alpha.is_finite() {
        let need = if mode == Mode::BProcess { "a >= 0" } else { "a > 1/2" };
        return Err(ConfigError::new("--alpha", format!("{mode:?} needs {need}, got {alpha}")).into());
    }
    if paths == 0 {
        return Err(ConfigError::new("--paths", "need at least one path").into());
    }
    let config = FbmConfig { grid: grid_spec.points()?, alpha, n_paths: paths, seed, mode };
    config.validate().map_err(config_err("--grid"))?;
    if let Some(a) = average {
        if !(a > 0.0) || !a.is_finite() {
            return Err(ConfigError::new("--average", format!("order must be positive, got {a}")).into());
        }
        if config.grid.len() < fbm::MIN_AVERAGING_GRID {
            return Err(ConfigError::new(
                "--average",
                format!("needs at least {} grid points, got {}", fbm::MIN_AVERAGING_GRID, config.grid.len()),
            )
            .into());
        }
    }
    let ens = fbm::sample_paths(&config)?;
    let covariance =
        if paths >= MIN_PATHS_FOR_COVARIANCE { Some(fbm::empirical_covariance(&ens)?) } else { None };
    let (averaging, samples) = match average {
        Some(a) => {
            let av = fbm::average_paths(&ens, a)?;
            (Some(Averaging { alpha: a, discretization_bound: av.discretization_bound }), av.ensemble.samples)
        }
        None => (None, ens.samples),
    };
    let doc = FbmDoc {
        command: "fbm".into(),
        config,
        grid_spec,
        versions: Versions::current(),
        jitter: ens.jitter,
        covariance,
        averaging,
        samples: None,
    };
    Ok((doc, samples))
}

pub fn paths_table(grid: &[f64], samples: &[Vec<f64>]) -> Table {
    let mut header = vec!["path".to_string()];
    header.extend(grid.iter().map(|&t| fmt_f64(t)));
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, row)| std::iter::once(i.to_string()).chain(row.iter().map(|&x| fmt_f64(x))).collect())
        .collect();
    Table { header, rows }
}

fn fbm_cmd(
    alpha: f64,
    grid: &str,
    paths: usize,
    seed: u64,
    mode: Mode,
    average: Option<f64>,
    output: &Output,
) -> Result<i32, CliError> {
    check_output(output)?;
    let (mut doc, samples) = fbm_doc(alpha, grid, paths, seed, mode, average)?;
    let format = output.format.unwrap_or(Format::Csv);
    if format == Format::Json {
        doc.samples = Some(samples.clone());
    }
    emit(output, Format::Csv, || paths_table(&doc.config.grid, &samples), &doc)?;
    match &doc.covariance {
        Some(r) if !r.pass => {
            eprintln!("covariance report: max score {:.2} standard errors exceeds 5", r.max_score);
            Ok(EXIT_FAILURES)
        }
        _ => Ok(EXIT_OK),
    }
}

pub fn verify_doc(tolerance: f64, suite: Option<&str>) -> Result<VerifyDoc, CliError> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(ConfigError::new("--tolerance", format!("scale must be positive, got {tolerance}")).into());
    }
    let opts = VerifyOptions { tolerance_scale: tolerance };
    let report = match suite {
        None => verify::run_all(&opts),
        Some(list) => {
            let names: Vec<&str> = list.split(',').map(str::trim).collect();
            let known = verify::suite_names();
            if let Some(bad) = names.iter().find(|n| !known.iter().any(|(k, _)| k == *n)) {
                return Err(ConfigError::new("--suite", format!("unknown suite {bad:?}")).into());
            }
            let suites: Vec<SuiteResult> = names.iter().filter_map(|n| verify::run_suite(n, &opts)).collect();
            let failed = suites.iter().filter(|s| !s.pass).count();
            VerifyReport { options: opts, suites, failed }
        }
    };
    Ok(VerifyDoc { command: "verify".into(), versions: Versions::current(), report })
}

impl VerifyDoc {
    pub fn table(&self) -> Table {
        let header = ["suite", "module", "cases", "failures", "worst_ratio", "pass", "elapsed_ms"];
        let rows = self
            .report
            .suites
            .iter()
            .map(|s| {
                vec![
                    s.name.clone(),
                    s.module.clone(),
                    s.cases.to_string(),
                    s.failures.to_string(),
                    fmt_f64(s.worst_ratio),
                    s.pass.to_string(),
                    s.elapsed_ms.to_string(),
                ]
            })
            .collect();
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.report.suites {
            out += &format!(
                "{:<5} {:<32} {:<15} {:>4} cases  worst {:.2e}  {} ms\n",
                if s.pass { "ok" } else { "FAIL" },
                s.name,
                s.module,
                s.cases,
                s.worst_ratio,
                s.elapsed_ms
            );
            if !s.pass {
                out += &format!("      {}\n", s.worst_case);
            }
        }
        out += &format!("{} of {} suites failed\n", self.report.failed, self.report.suites.len());
        out
    }
}

fn verify_cmd(tolerance: f64, suite: Option<&str>, output: &Output) -> Result<i32, CliError> {
    check_output(output)?;
    let doc = verify_doc(tolerance, suite)?;
    eprint!("{}", doc.summary());
    emit(output, Format::Json, || doc.table(), &doc)?;
    Ok(if doc.report.failed == 0 { EXIT_OK } else { EXIT_FAILURES })
}
