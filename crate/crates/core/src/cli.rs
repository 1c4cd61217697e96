//! Command-line front end. Every artifact carries the resolved [`RunConfig`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::deviating::{
    asymptotic_lambda1, eigenvalues_with, lowest_modes, smallest_eigenvalue, DeviatingMode,
    ScanOptions,
};
use crate::error::{Error, Result};
use crate::operator::{dirichlet_spectrum_1d, load_spectrum, OperatorSpectrum};
use crate::oracle::oracle_eigenvalues;
use crate::quadrature::simpson_fn;
use crate::solver::{
    criterion, hadamard_amplification, load_coefficients, load_grid, project_f, residual, solve,
    split_subspace, stability_constant, GridSamples, ModeBasis, ModeCoefficients,
};

pub const THREADS_ENV: &str = "CYLCAUCHY_THREADS";
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_PANELS: usize = 2048;
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_M: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "cylcauchy",
    version,
    about = "Spectral analysis of the elliptic Cauchy problem in a cylinder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues of the reflected-argument problem for one mu.
    Spectrum {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Restrict to |lambda| <= this bound instead of widening the scan.
        #[arg(long = "lambda-max")]
        lambda_max: Option<f64>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the analytic spectrum against the Nystrom/Jacobi oracle.
    Oracle {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long = "grid-size", default_value_t = 200)]
        grid_size: usize,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// lambda_k1 against its exponential asymptotics.
    Asymptotics {
        #[arg(long = "k-range", default_value = "5..15", value_parser = parse_range)]
        k_range: KRange,
        #[command(flatten)]
        source: SpectrumArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Truncated solvability test for a data set.
    Criterion {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Spectral solution of the Cauchy problem.
    Solve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "allow-ill-posed")]
        allow_ill_posed: bool,
        /// Solve only the component in the stable subspace for this cutoff.
        #[arg(long = "cutoff-p")]
        cutoff_p: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Amplification 1/lambda_k1 of data concentrated on one direction.
    Hadamard {
        #[arg(long = "k-range", default_value = "2..12", value_parser = parse_range)]
        k_range: KRange,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[command(flatten)]
        source: SpectrumArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Simpson panels for norm checks.
    #[arg(long, default_value_t = DEFAULT_PANELS)]
    panels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Root-scan step; default min(1, range/2048).
    #[arg(long = "scan-step")]
    scan_step: Option<f64>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Spectrum file `k,mu[,label]`; default is the Dirichlet spectrum on (0, pi).
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Coefficient file `k,m,value` or grid CSV with a `# nx=..,nt=..` line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "K", default_value_t = DEFAULT_K)]
    k_max: usize,
    #[arg(long = "M", default_value_t = DEFAULT_M)]
    m_max: usize,
    /// Sample the solution on an n x n grid (1-D basis only).
    #[arg(long = "grid-size")]
    grid_size: Option<usize>,
    #[command(flatten)]
    source: SpectrumArgs,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Inclusive `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KRange {
    pub start: usize,
    pub end: usize,
}

impl KRange {
    pub fn to_vec(self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }
}

pub fn parse_range(s: &str) -> std::result::Result<KRange, String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start in `{s}`"))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end in `{s}`"))?;
    if a == 0 || b < a {
        return Err(format!("range `{s}` must satisfy 1 <= a <= b"));
    }
    Ok(KRange { start: a, end: b })
}

/// Fully resolved run parameters; fields that do not apply are `null`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub mu: Option<f64>,
    pub k_range: Option<KRange>,
    pub count: Option<usize>,
    pub grid_size: Option<usize>,
    pub lambda_max: Option<f64>,
    #[serde(rename = "K")]
    pub k_max: Option<usize>,
    #[serde(rename = "M")]
    pub m_max: Option<usize>,
    pub input: Option<PathBuf>,
    pub spectrum: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tol: f64,
    pub panels: usize,
    pub scan_step: Option<f64>,
    pub epsilon: Option<f64>,
    pub cutoff_p: Option<usize>,
    pub allow_ill_posed: bool,
    pub seed: u64,
    pub version: &'static str,
}

impl RunConfig {
    fn new(subcommand: &'static str, common: &CommonArgs) -> Self {
        Self {
            subcommand,
            mu: None,
            k_range: None,
            count: None,
            grid_size: None,
            lambda_max: None,
            k_max: None,
            m_max: None,
            input: None,
            spectrum: None,
            output: common.output.clone(),
            format: common.format,
            tol: common.tol,
            panels: common.panels,
            scan_step: None,
            epsilon: None,
            cutoff_p: None,
            allow_ill_posed: false,
            seed: common.seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            step: self.scan_step,
        }
    }
}

/// A table plus optional extra top-level JSON fields.
struct Artifact {
    config: RunConfig,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    extra: Map<String, Value>,
}

impl Artifact {
    fn render(&self) -> Result<String> {
        match self.config.format {
            Format::Json => {
                let mut top = Map::new();
                top.insert("config".into(), serde_json::to_value(&self.config)?);
                let rows = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns
                                .iter()
                                .map(|c| c.to_string())
                                .zip(r.iter().cloned())
                                .collect(),
                        )
                    })
                    .collect();
                top.insert("rows".into(), Value::Array(rows));
                for (k, v) in &self.extra {
                    top.insert(k.clone(), v.clone());
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(top))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut s = format!("# config: {}\n", serde_json::to_string(&self.config)?);
                for (k, v) in &self.extra {
                    let _ = writeln!(s, "# {k}: {}", serde_json::to_string(v)?);
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                Ok(s)
            }
        }
    }
}

// 17 significant digits for floats
fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    // serde_json maps non-finite floats to null
    json!(x)
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Parses `argv` (program name first), runs, and writes to stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Exit code 0 on success, 1 on a computational refusal or failure, 2 on
/// usage errors.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| execute(cli)),
        Ok(None) => execute(cli),
        Err(e) => Err(e),
    };
    match result.and_then(|artifact| emit(&artifact, out)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Format { .. } | Error::Io(_) => 2,
        _ => 1,
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidArgument(format!("{THREADS_ENV}={raw} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn emit(artifact: &Artifact, out: &mut dyn Write) -> Result<()> {
    let text = artifact.render()?;
    match &artifact.config.output {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        Error::InvalidArgument(format!("output path {} has no file name", path.display()))
    })?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let written = fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    if let Err(e) = written.and_then(|()| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<Artifact> {
    match cli.command {
        Command::Spectrum {
            mu,
            count,
            lambda_max,
            scan,
            common,
        } => {
            let mut config = RunConfig::new("spectrum", &common);
            config.mu = Some(mu);
            config.count = Some(count);
            config.lambda_max = lambda_max;
            config.scan_step = scan.scan_step;
            cmd_spectrum(config)
        }
        Command::Oracle {
            mu,
            count,
            grid_size,
            scan,
            common,
        } => {
            let mut config = RunConfig::new("oracle", &common);
            config.mu = Some(mu);
            config.count = Some(count);
            config.grid_size = Some(grid_size);
            config.scan_step = scan.scan_step;
            cmd_oracle(config)
        }
        Command::Asymptotics {
            k_range,
            source,
            common,
        } => {
            let mut config = RunConfig::new("asymptotics", &common);
            config.k_range = Some(k_range);
            config.spectrum = source.spectrum;
            cmd_asymptotics(config)
        }
        Command::Criterion { data, common } => {
            let mut config = RunConfig::new("criterion", &common);
            apply_data(&mut config, data);
            cmd_criterion(config)
        }
        Command::Solve {
            data,
            allow_ill_posed,
            cutoff_p,
            common,
        } => {
            let mut config = RunConfig::new("solve", &common);
            apply_data(&mut config, data);
            config.allow_ill_posed = allow_ill_posed;
            config.cutoff_p = cutoff_p;
            cmd_solve(config)
        }
        Command::Hadamard {
            k_range,
            epsilon,
            source,
            common,
        } => {
            let mut config = RunConfig::new("hadamard", &common);
            config.k_range = Some(k_range);
            config.epsilon = Some(epsilon);
            config.spectrum = source.spectrum;
            cmd_hadamard(config)
        }
    }
}

fn apply_data(config: &mut RunConfig, data: DataArgs) {
    config.input = Some(data.input);
    config.k_max = Some(data.k_max);
    config.m_max = Some(data.m_max);
    config.grid_size = data.grid_size;
    config.spectrum = data.source.spectrum;
    config.scan_step = data.scan.scan_step;
}

fn artifact(config: RunConfig, columns: Vec<&'static str>, rows: Vec<Vec<Value>>) -> Artifact {
    Artifact {
        config,
        columns,
        rows,
        extra: Map::new(),
    }
}

fn spectrum_for(config: &RunConfig, needed: usize) -> Result<OperatorSpectrum> {
    match &config.spectrum {
        Some(path) => load_spectrum(path),
        None => dirichlet_spectrum_1d(needed.max(1)),
    }
}

fn l2_norm(mode: &DeviatingMode, panels: usize) -> f64 {
    simpson_fn(|t| mode.eval(t).powi(2), 0.0, 1.0, panels).sqrt()
}

fn cmd_spectrum(config: RunConfig) -> Result<Artifact> {
    let mu = config.mu.unwrap_or_default();
    let count = config.count.unwrap_or_default();
    if config.panels < 2 {
        return Err(Error::InvalidArgument("panels must be at least 2".into()));
    }
    let modes = match config.lambda_max {
        Some(limit) => eigenvalues_with(mu, limit, count, &config.scan_options())?,
        None => lowest_modes(mu, count, &config.scan_options())?,
    };
    let rows = modes
        .iter()
        .map(|m| vec![json!(m.m), num(m.lambda), num(m.residual())])
        .collect();
    let mut a = artifact(config, vec!["m", "lambda", "residual"], rows);
    let norms: Vec<Value> = modes
        .iter()
        .map(|m| num(l2_norm(m, a.config.panels)))
        .collect();
    a.extra.insert("l2_norms".into(), Value::Array(norms));
    Ok(a)
}

fn cmd_oracle(config: RunConfig) -> Result<Artifact> {
    let mu = config.mu.unwrap_or_default();
    let count = config.count.unwrap_or_default();
    let n = config.grid_size.unwrap_or_default();
    let oracle = oracle_eigenvalues(mu, n, count)?;
    let analytic = lowest_modes(mu, count, &config.scan_options())?;
    let rows = analytic
        .iter()
        .enumerate()
        .map(|(i, mode)| {
            let discrete = oracle.pairs.get(i).map(|p| p.lambda);
            let rel = discrete.map(|d| (d - mode.lambda).abs() / mode.lambda.abs());
            vec![json!(mode.m), num(mode.lambda), opt(discrete), opt(rel)]
        })
        .collect();
    let truncated = oracle.truncated;
    let mut a = artifact(
        config,
        vec![
            "m",
            "lambda_analytic",
            "lambda_oracle",
            "relative_difference",
        ],
        rows,
    );
    a.extra.insert("oracle_truncated".into(), json!(truncated));
    Ok(a)
}

fn cmd_asymptotics(config: RunConfig) -> Result<Artifact> {
    let ks = config.k_range.map(KRange::to_vec).unwrap_or_default();
    let spectrum = spectrum_for(&config, ks.last().copied().unwrap_or(1))?;
    let tol = config.tol;
    let rows = ks
        .iter()
        .map(|&k| {
            let mu = spectrum
                .mu(k)
                .ok_or_else(|| Error::InvalidArgument(format!("k = {k} outside the spectrum")))?;
            let lambda = smallest_eigenvalue(mu, tol)?.lambda;
            let asym = asymptotic_lambda1(mu)?;
            Ok(vec![
                json!(k),
                num(mu),
                num(lambda),
                num(asym.leading),
                num(asym.refined),
                num(lambda / asym.leading),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(artifact(
        config,
        vec!["k", "mu", "lambda_k1", "leading", "refined", "ratio"],
        rows,
    ))
}

/// Reads data coefficients from a coefficient file or a sampled grid.
fn load_data(
    config: &RunConfig,
    basis_for_grid: impl FnOnce() -> Result<ModeBasis>,
) -> Result<(ModeCoefficients, Option<ModeBasis>)> {
    let path = config.input.as_ref().expect("data subcommands set input");
    let text = fs::read_to_string(path)?;
    let k_max = config.k_max.unwrap_or(DEFAULT_K);
    let m_max = config.m_max.unwrap_or(DEFAULT_M);
    if looks_like_grid(&text) {
        let grid: GridSamples = load_grid(path)?;
        let basis = basis_for_grid()?;
        Ok((project_f(&grid, &basis)?, Some(basis)))
    } else {
        Ok((load_coefficients(path, k_max, m_max)?, None))
    }
}

fn looks_like_grid(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .any(|l| l.starts_with('#') && l.contains("nx="))
}

fn cmd_criterion(config: RunConfig) -> Result<Artifact> {
    let k_max = config.k_max.unwrap_or(DEFAULT_K);
    let m_max = config.m_max.unwrap_or(DEFAULT_M);
    let spectrum = spectrum_for(&config, k_max)?;
    let options = config.scan_options();
    let (coeffs, basis) = load_data(&config, || {
        ModeBasis::new(&spectrum, k_max, m_max, &options)
    })?;
    let lambda1 = match basis {
        Some(b) => b.lambda1s(),
        None => lambda1_list(&spectrum, k_max, config.tol)?,
    };
    let report = criterion(&coeffs, &lambda1)?;
    let rows = (1..=k_max)
        .map(|k| {
            vec![
                json!(k),
                num(coeffs.get(k, 1)),
                num(lambda1[k - 1]),
                num(report.amplifications[k - 1]),
                num(report.partial_sums[k - 1]),
            ]
        })
        .collect();
    let mut a = artifact(
        config,
        vec!["k", "f_k1", "lambda_k1", "amplification", "partial_sum"],
        rows,
    );
    if let Value::Object(fields) = serde_json::to_value(&report)? {
        a.extra.extend(fields);
    }
    Ok(a)
}

fn lambda1_list(spectrum: &OperatorSpectrum, k_max: usize, tol: f64) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let spectrum = spectrum.truncated(k_max)?;
    spectrum
        .mus()
        .par_iter()
        .map(|&mu| smallest_eigenvalue(mu, tol).map(|m| m.lambda))
        .collect()
}

fn cmd_solve(config: RunConfig) -> Result<Artifact> {
    let k_max = config.k_max.unwrap_or(DEFAULT_K);
    let m_max = config.m_max.unwrap_or(DEFAULT_M);
    let spectrum = spectrum_for(&config, k_max)?;
    let options = config.scan_options();
    let (data, basis) = load_data(&config, || {
        ModeBasis::new(&spectrum, k_max, m_max, &options)
    })?;
    let basis = match basis {
        Some(b) => b,
        None => ModeBasis::new(&spectrum, k_max, m_max, &options)?,
    };
    let (data, stability) = match config.cutoff_p {
        Some(p) => (
            split_subspace(&data, p)?.hat_part,
            Some(stability_constant(&basis, p)),
        ),
        None => (data, None),
    };
    let u = solve(&data, &basis, config.allow_ill_posed)?;
    let res = residual(&u, &data, &basis)?;
    let rows = data
        .iter()
        .map(|(k, m, f)| {
            vec![
                json!(k),
                json!(m),
                num(f),
                num(basis.lambda(k, m)),
                num(u.coefficients.get(k, m)),
            ]
        })
        .collect();
    let samples = match config.grid_size {
        Some(n) => Some(u.sample(&basis, n, n)?),
        None => None,
    };
    let mut a = artifact(config, vec!["k", "m", "f", "lambda", "a"], rows);
    a.extra.insert("norm_sq".into(), num(u.norm_sq));
    a.extra
        .insert("norm_sq_principal".into(), num(u.norm_sq_principal));
    a.extra.insert("norm_sq_rest".into(), num(u.norm_sq_rest));
    a.extra.insert("data_norm".into(), num(data.norm()));
    a.extra.insert("residual".into(), num(res));
    if let Some(c) = stability {
        a.extra.insert("stability_constant".into(), num(c));
    }
    if let Some(g) = samples {
        let values: Vec<Value> = (0..g.nx)
            .map(|i| Value::Array((0..g.nt).map(|j| num(g.value(i, j))).collect()))
            .collect();
        a.extra.insert(
            "samples".into(),
            json!({ "nx": g.nx, "nt": g.nt, "values": values }),
        );
    }
    Ok(a)
}

fn cmd_hadamard(config: RunConfig) -> Result<Artifact> {
    let ks = config.k_range.map(KRange::to_vec).unwrap_or_default();
    let spectrum = spectrum_for(&config, ks.last().copied().unwrap_or(1))?;
    let table = hadamard_amplification(
        &spectrum,
        &ks,
        config.epsilon.unwrap_or_default(),
        config.tol,
    )?;
    let rows = table
        .iter()
        .map(|r| {
            vec![
                json!(r.k),
                num(r.mu),
                opt(r.lambda_k1),
                opt(r.amplification),
                opt(r.solution_norm),
                json!(if r.representable {
                    "ok"
                } else {
                    "unrepresentable"
                }),
            ]
        })
        .collect();
    Ok(artifact(
        config,
        vec![
            "k",
            "mu",
            "lambda_k1",
            "amplification",
            "solution_norm",
            "status",
        ],
        rows,
    ))
}
