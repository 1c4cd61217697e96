//! Spectral solution of the Cauchy problem
//!
//! ```text
//! u_tt - L_x u = f  in  Omega x (0, 1),    u(x, 0) = u_t(x, 0) = 0.
//! ```
//!
//! In the product basis `u_km(x, t) = u_k(x) v_km(t)` the problem is
//! diagonal: applying the operator to `u_km` yields `lambda_km u_km(x, 1 - t)`,
//! so with the reflected data coefficients
//! `f~_km = (f(x, 1 - t), u_km(x, t))` the solution coefficients are
//! `a_km = f~_km / lambda_km`. A strong solution exists exactly when
//! `sum_k |f~_k1 / lambda_k1|^2` converges; the `m >= 2` terms are harmless
//! because those eigenvalues are bounded away from zero.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::deviating::{lowest_modes, smallest_eigenvalue, DeviatingMode, ScanOptions};
use crate::error::{Error, Result};
use crate::operator::{basis_1d, OperatorSpectrum};
use crate::quadrature::simpson_weights;

/// Deviating-problem eigenpairs for every `(k <= K, m <= M)`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeBasis {
    spectrum: OperatorSpectrum,
    m_max: usize,
    modes: Vec<Vec<DeviatingMode>>,
}

impl ModeBasis {
    pub fn new(
        spectrum: &OperatorSpectrum,
        k_max: usize,
        m_max: usize,
        options: &ScanOptions,
    ) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        let spectrum = spectrum.truncated(k_max)?;
        let modes = spectrum
            .mus()
            .par_iter()
            .map(|&mu| lowest_modes(mu, m_max, options))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectrum,
            m_max,
            modes,
        })
    }

    pub fn spectrum(&self) -> &OperatorSpectrum {
        &self.spectrum
    }

    pub fn k_max(&self) -> usize {
        self.modes.len()
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn mode(&self, k: usize, m: usize) -> &DeviatingMode {
        &self.modes[k - 1][m - 1]
    }

    pub fn modes_for(&self, k: usize) -> &[DeviatingMode] {
        &self.modes[k - 1]
    }

    pub fn lambda(&self, k: usize, m: usize) -> f64 {
        self.mode(k, m).lambda
    }

    /// Smallest-`|lambda|` eigenvalue for each `k`.
    pub fn lambda1s(&self) -> Vec<f64> {
        self.modes.iter().map(|row| row[0].lambda).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GridProjected,
    FileLoaded,
    Synthetic,
}

/// Dense `K x M` table indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCoefficients {
    k_max: usize,
    m_max: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl ModeCoefficients {
    pub fn zeros(k_max: usize, m_max: usize, provenance: Provenance) -> Self {
        Self {
            k_max,
            m_max,
            values: vec![0.0; k_max * m_max],
            provenance,
        }
    }

    pub fn from_fn(
        k_max: usize,
        m_max: usize,
        provenance: Provenance,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut c = Self::zeros(k_max, m_max, provenance);
        for k in 1..=k_max {
            for m in 1..=m_max {
                c.values[(k - 1) * m_max + (m - 1)] = f(k, m);
            }
        }
        c
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn get(&self, k: usize, m: usize) -> f64 {
        assert!((1..=self.k_max).contains(&k) && (1..=self.m_max).contains(&m));
        self.values[(k - 1) * self.m_max + (m - 1)]
    }

    pub fn set(&mut self, k: usize, m: usize, value: f64) {
        assert!((1..=self.k_max).contains(&k) && (1..=self.m_max).contains(&m));
        self.values[(k - 1) * self.m_max + (m - 1)] = value;
    }

    /// `(k, m, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i / self.m_max + 1, i % self.m_max + 1, v))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.k_max == other.k_max && self.m_max == other.m_max
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::InvalidArgument(
                "coefficient truncations differ".into(),
            ));
        }
        Ok(Self {
            k_max: self.k_max,
            m_max: self.m_max,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
            provenance: Provenance::Synthetic,
        })
    }

    /// Coefficient file body: `k,m,value` per line.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("# k,m,value\n");
        for (k, m, v) in self.iter() {
            let _ = writeln!(out, "{k},{m},{v:.16e}");
        }
        out
    }
}

/// Parses `k,m,value` lines into a `K x M` table. Pairs outside the
/// truncation are dropped; missing pairs are zero.
pub fn parse_coefficients(
    text: &str,
    origin: &Path,
    k_max: usize,
    m_max: usize,
) -> Result<ModeCoefficients> {
    if k_max == 0 || m_max == 0 {
        return Err(Error::InvalidArgument("K and M must be positive".into()));
    }
    let format_err = |line: usize, message: String| Error::Format {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut coeffs = ModeCoefficients::zeros(k_max, m_max, Provenance::FileLoaded);
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [k, m, v] = fields.as_slice() else {
            return Err(format_err(
                line_no,
                format!("expected `k,m,value`, got `{line}`"),
            ));
        };
        let k: usize = k
            .parse()
            .map_err(|_| format_err(line_no, format!("bad index k `{k}`")))?;
        let m: usize = m
            .parse()
            .map_err(|_| format_err(line_no, format!("bad index m `{m}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| format_err(line_no, format!("bad value `{v}`")))?;
        if k == 0 || m == 0 {
            return Err(format_err(line_no, "indices start at 1".into()));
        }
        if !v.is_finite() {
            return Err(format_err(
                line_no,
                format!("value for ({k},{m}) is not finite"),
            ));
        }
        if !seen.insert((k, m)) {
            return Err(format_err(line_no, format!("duplicate entry ({k},{m})")));
        }
        if k <= k_max && m <= m_max {
            coeffs.set(k, m, v);
        }
    }
    Ok(coeffs)
}

pub fn load_coefficients(
    path: impl AsRef<Path>,
    k_max: usize,
    m_max: usize,
) -> Result<ModeCoefficients> {
    let path = path.as_ref();
    parse_coefficients(&fs::read_to_string(path)?, path, k_max, m_max)
}

/// Samples of a function on the uniform grid `x_i = pi i/(nx-1)`,
/// `t_j = j/(nt-1)`, stored with `x` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub nx: usize,
    pub nt: usize,
    values: Vec<f64>,
}

impl GridSamples {
    pub fn from_fn(nx: usize, nt: usize, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if nx < 2 || nt < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least two points per axis".into(),
            ));
        }
        let mut values = Vec::with_capacity(nx * nt);
        for i in 0..nx {
            for j in 0..nt {
                values.push(f(grid_x(i, nx), grid_t(j, nt)));
            }
        }
        Ok(Self { nx, nt, values })
    }

    pub fn value(&self, ix: usize, it: usize) -> f64 {
        self.values[ix * self.nt + it]
    }

    pub fn x(&self, ix: usize) -> f64 {
        grid_x(ix, self.nx)
    }

    pub fn t(&self, it: usize) -> f64 {
        grid_t(it, self.nt)
    }

    /// Simpson approximation of `int int f^2 dx dt`.
    pub fn l2_norm_sq(&self) -> f64 {
        let wx = simpson_weights(self.nx, PI / (self.nx - 1) as f64);
        let wt = simpson_weights(self.nt, 1.0 / (self.nt - 1) as f64);
        let mut sum = 0.0;
        for i in 0..self.nx {
            for j in 0..self.nt {
                sum += wx[i] * wt[j] * self.value(i, j).powi(2);
            }
        }
        sum
    }

    /// CSV with the `# nx=..,nt=..` line and an `x,t,value` header.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# nx={},nt={}\nx,t,value\n", self.nx, self.nt);
        for i in 0..self.nx {
            for j in 0..self.nt {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    self.x(i),
                    self.t(j),
                    self.value(i, j)
                );
            }
        }
        out
    }
}

fn grid_x(i: usize, nx: usize) -> f64 {
    if i + 1 == nx {
        PI
    } else {
        PI * i as f64 / (nx - 1) as f64
    }
}

fn grid_t(j: usize, nt: usize) -> f64 {
    if j + 1 == nt {
        1.0
    } else {
        j as f64 / (nt - 1) as f64
    }
}

pub fn parse_grid(text: &str, origin: &Path) -> Result<GridSamples> {
    let format_err = |line: usize, message: String| Error::Format {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut dims: Option<(usize, usize)> = None;
    let mut header_seen = false;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(d) = parse_dims(comment) {
                dims = Some(d);
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["x", "t", "value"] {
                return Err(format_err(
                    line_no,
                    format!("expected header `x,t,value`, got `{line}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let Some((nx, nt)) = dims else {
            return Err(format_err(
                line_no,
                "missing `# nx=..,nt=..` line before data".into(),
            ));
        };
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format_err(line_no, format!("bad row `{line}`")))?;
        let [x, t, v] = fields.as_slice() else {
            return Err(format_err(
                line_no,
                format!("expected three columns, got `{line}`"),
            ));
        };
        let n = values.len();
        if n >= nx * nt {
            return Err(format_err(
                line_no,
                format!("more than nx*nt = {} rows", nx * nt),
            ));
        }
        let (i, j) = (n / nt, n % nt);
        if (x - grid_x(i, nx)).abs() > 1e-9 || (t - grid_t(j, nt)).abs() > 1e-9 {
            return Err(format_err(
                line_no,
                format!(
                    "point ({x}, {t}) is not grid node ({i}, {j}) of the uniform {nx}x{nt} grid"
                ),
            ));
        }
        if !v.is_finite() {
            return Err(format_err(line_no, "value is not finite".into()));
        }
        values.push(*v);
    }
    let (nx, nt) = dims.ok_or_else(|| format_err(0, "missing `# nx=..,nt=..` line".into()))?;
    if nx < 2 || nt < 2 {
        return Err(format_err(
            0,
            "grid needs at least two points per axis".into(),
        ));
    }
    if values.len() != nx * nt {
        return Err(format_err(
            0,
            format!("expected {} rows, found {}", nx * nt, values.len()),
        ));
    }
    Ok(GridSamples { nx, nt, values })
}

fn parse_dims(comment: &str) -> Option<(usize, usize)> {
    let mut nx = None;
    let mut nt = None;
    for part in comment.split(',') {
        let (key, value) = part.split_once('=')?;
        match key.trim() {
            "nx" => nx = value.trim().parse().ok(),
            "nt" => nt = value.trim().parse().ok(),
            _ => {}
        }
    }
    Some((nx?, nt?))
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<GridSamples> {
    let path = path.as_ref();
    parse_grid(&fs::read_to_string(path)?, path)
}

pub const MIN_GRID_POINTS: usize = 64;
const POINTS_PER_OSCILLATION: f64 = 8.0;

/// Reflected data coefficients `f~_km = int int f(x, 1-t) u_k(x) v_km(t)`
/// by composite Simpson quadrature. Only the built-in 1-D basis can be
/// evaluated on a grid.
pub fn project_f(grid: &GridSamples, basis: &ModeBasis) -> Result<ModeCoefficients> {
    if !basis.spectrum().has_evaluable_basis() {
        return Err(Error::Unsupported(format!(
            "grid projection needs an evaluable basis; spectrum `{}` is coefficient-only",
            basis.spectrum().domain_descriptor()
        )));
    }
    let (nx, nt) = (grid.nx, grid.nt);
    if nx < MIN_GRID_POINTS || nt < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid {nx}x{nt} is below {MIN_GRID_POINTS} points per axis"
        )));
    }
    let (k_max, m_max) = (basis.k_max(), basis.m_max());
    let x_points_per_period = 2.0 * (nx - 1) as f64 / k_max as f64;
    if x_points_per_period < POINTS_PER_OSCILLATION {
        return Err(Error::Resolution(format!(
            "{x_points_per_period:.1} x-points per oscillation of u_{k_max}; need {POINTS_PER_OSCILLATION}"
        )));
    }
    for k in 1..=k_max {
        for mode in basis.modes_for(k) {
            let omega = (mode.mu + mode.lambda.abs()).sqrt();
            let per = (nt - 1) as f64 * 2.0 * PI / omega;
            if per < POINTS_PER_OSCILLATION {
                return Err(Error::Resolution(format!(
                    "{per:.1} t-points per oscillation of v_({k},{}); need {POINTS_PER_OSCILLATION}",
                    mode.m
                )));
            }
        }
    }

    let wx = simpson_weights(nx, PI / (nx - 1) as f64);
    let wt = simpson_weights(nt, 1.0 / (nt - 1) as f64);
    let rows: Vec<Vec<f64>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            // g(t_j) = int f(x, 1 - t_j) u_k(x) dx; the uniform grid maps
            // 1 - t_j onto node nt-1-j exactly.
            let g: Vec<f64> = (0..nt)
                .map(|j| {
                    let jr = nt - 1 - j;
                    (0..nx)
                        .map(|i| wx[i] * grid.value(i, jr) * basis_1d(k, grid.x(i)))
                        .sum()
                })
                .collect();
            basis
                .modes_for(k)
                .iter()
                .map(|mode| (0..nt).map(|j| wt[j] * g[j] * mode.eval(grid.t(j))).sum())
                .collect()
        })
        .collect();
    Ok(ModeCoefficients::from_fn(
        k_max,
        m_max,
        Provenance::GridProjected,
        |k, m| rows[k - 1][m - 1],
    ))
}

/// Grid samples of `f = L u` for `u = sum a_km u_k(x) v_km(t)`, using
/// `L u_km (x, t) = lambda_km u_k(x) v_km(1 - t)`.
pub fn synthesize_data(
    solution: &ModeCoefficients,
    basis: &ModeBasis,
    nx: usize,
    nt: usize,
) -> Result<GridSamples> {
    check_against_basis(solution, basis)?;
    if !basis.spectrum().has_evaluable_basis() {
        return Err(Error::Unsupported(
            "synthesis needs an evaluable basis".into(),
        ));
    }
    let terms: Vec<(usize, f64, &DeviatingMode)> = solution
        .iter()
        .filter(|&(_, _, a)| a != 0.0)
        .map(|(k, m, a)| (k, a * basis.lambda(k, m), basis.mode(k, m)))
        .collect();
    GridSamples::from_fn(nx, nt, |x, t| {
        terms
            .iter()
            .map(|(k, c, mode)| c * basis_1d(*k, x) * mode.eval(1.0 - t))
            .sum()
    })
}

fn check_against_basis(coeffs: &ModeCoefficients, basis: &ModeBasis) -> Result<()> {
    if coeffs.k_max() > basis.k_max() || coeffs.m_max() > basis.m_max() {
        return Err(Error::InvalidArgument(format!(
            "coefficients are {}x{} but the basis only has {}x{} modes",
            coeffs.k_max(),
            coeffs.m_max(),
            basis.k_max(),
            basis.m_max()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Indeterminate,
    /// Fewer than five transverse modes; sums are still reported.
    InsufficientData,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolvabilityReport {
    /// `S_K = sum_{k <= K} |f~_k1 / lambda_k1|^2` for every `K`.
    pub partial_sums: Vec<f64>,
    /// `1 / lambda_k1`.
    pub amplifications: Vec<f64>,
    pub verdict: Verdict,
    /// `exp(-rho)` from the log-linear fit over the last window.
    pub tail_ratio: Option<f64>,
    pub window: usize,
    /// Fitted `p` in `d_k ~ k^-p` over the last window.
    pub power_exponent: Option<f64>,
}

/// Truncated form of the solvability test: partial sums of
/// `d_k = |f~_k1 / lambda_k1|^2` plus a verdict from the last window
/// `W = max(5, K/4)` of terms:
///
/// 1. all window terms below `1e-14 S_K`: convergent;
/// 2. window nondecreasing with `d_K > 1e-12`: divergent;
/// 3. log-linear fit `log d_k ~ -rho k`: `rho > 0.1` convergent,
///    `rho < -0.1` divergent;
/// 4. log-log fit `log d_k ~ -p log k`: `p > 1.1` convergent, `p < 0.9`
///    divergent;
/// 5. otherwise indeterminate, including windows with exact zeros that
///    rule 1 does not settle.
pub fn criterion(coeffs: &ModeCoefficients, lambda1: &[f64]) -> Result<SolvabilityReport> {
    let k_max = coeffs.k_max();
    if lambda1.len() < k_max {
        return Err(Error::InvalidArgument(format!(
            "{} smallest eigenvalues for {k_max} transverse modes",
            lambda1.len()
        )));
    }
    if let Some(k) = lambda1[..k_max]
        .iter()
        .position(|&l| l == 0.0 || !l.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "lambda_({},1) is zero or not finite",
            k + 1
        )));
    }
    let terms: Vec<f64> = (1..=k_max)
        .map(|k| (coeffs.get(k, 1) / lambda1[k - 1]).powi(2))
        .collect();
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    let amplifications = lambda1[..k_max].iter().map(|l| 1.0 / l).collect();

    let window = 5.max(k_max / 4).min(k_max);
    if k_max < 5 {
        return Ok(SolvabilityReport {
            partial_sums,
            amplifications,
            verdict: Verdict::InsufficientData,
            tail_ratio: None,
            window,
            power_exponent: None,
        });
    }
    let total = partial_sums[k_max - 1];
    let start = k_max - window; // 0-based index of first window term
    let tail = &terms[start..];
    let ks: Vec<f64> = (start + 1..=k_max).map(|k| k as f64).collect();

    // log fits need every window term positive
    let fittable = tail.iter().all(|&d| d > 0.0);
    let logs: Vec<(f64, f64)> = ks.iter().zip(tail).map(|(&k, &d)| (k, d.ln())).collect();
    let rho = fittable.then(|| -slope(logs.iter().copied()));
    let power = fittable.then(|| -slope(logs.iter().map(|&(k, y)| (k.ln(), y))));
    let tail_ratio = rho.map(|r| (-r).exp());

    let max_tail = tail.iter().cloned().fold(0.0, f64::max);
    let verdict = if total == 0.0 || max_tail < 1e-14 * total {
        Verdict::Convergent
    } else if tail.windows(2).all(|w| w[1] >= w[0]) && terms[k_max - 1] > 1e-12 {
        Verdict::Divergent
    } else {
        match (rho, power) {
            (Some(r), _) if r > 0.1 => Verdict::Convergent,
            (Some(r), _) if r < -0.1 => Verdict::Divergent,
            (_, Some(p)) if p > 1.1 => Verdict::Convergent,
            (_, Some(p)) if p < 0.9 => Verdict::Divergent,
            _ => Verdict::Indeterminate,
        }
    };
    Ok(SolvabilityReport {
        partial_sums,
        amplifications,
        verdict,
        tail_ratio,
        window,
        power_exponent: power,
    })
}

// least-squares slope of y on x
fn slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    let (sx, sy) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionField {
    /// `a_km = f~_km / lambda_km`.
    pub coefficients: ModeCoefficients,
    /// `||u||^2 = sum a_km^2`.
    pub norm_sq: f64,
    /// The `m = 1` part of `norm_sq`.
    pub norm_sq_principal: f64,
    /// The `m >= 2` part of `norm_sq`.
    pub norm_sq_rest: f64,
    pub evaluable: bool,
}

impl SolutionField {
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// `u(x, t) = sum a_km u_k(x) v_km(t)`; built-in 1-D basis only.
    pub fn evaluate(&self, basis: &ModeBasis, x: f64, t: f64) -> Result<f64> {
        if !self.evaluable {
            return Err(Error::Unsupported(
                "solution has no spatial basis to evaluate".into(),
            ));
        }
        if !(0.0..=PI).contains(&x) || !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "({x}, {t}) outside [0, pi] x [0, 1]"
            )));
        }
        Ok(self
            .coefficients
            .iter()
            .filter(|&(_, _, a)| a != 0.0)
            .map(|(k, m, a)| a * basis_1d(k, x) * basis.mode(k, m).eval(t))
            .sum())
    }

    pub fn sample(&self, basis: &ModeBasis, nx: usize, nt: usize) -> Result<GridSamples> {
        if !self.evaluable {
            return Err(Error::Unsupported(
                "solution has no spatial basis to evaluate".into(),
            ));
        }
        let terms: Vec<(usize, f64, &DeviatingMode)> = self
            .coefficients
            .iter()
            .filter(|&(_, _, a)| a != 0.0)
            .map(|(k, m, a)| (k, a, basis.mode(k, m)))
            .collect();
        GridSamples::from_fn(nx, nt, |x, t| {
            terms
                .iter()
                .map(|(k, a, mode)| a * basis_1d(*k, x) * mode.eval(t))
                .sum()
        })
    }
}

const LAMBDA_FLOOR: f64 = 1e-290;

/// Divides every data coefficient by its eigenvalue. Data failing the
/// solvability test are refused unless `allow_ill_posed` is set.
pub fn solve(
    coeffs: &ModeCoefficients,
    basis: &ModeBasis,
    allow_ill_posed: bool,
) -> Result<SolutionField> {
    check_against_basis(coeffs, basis)?;
    if !allow_ill_posed && coeffs.k_max() >= 5 {
        let report = criterion(coeffs, &basis.lambda1s())?;
        if report.verdict == Verdict::Divergent {
            return Err(Error::RefusedIllPosed);
        }
    }
    let mut a = ModeCoefficients::zeros(coeffs.k_max(), coeffs.m_max(), Provenance::Synthetic);
    let (mut principal, mut rest) = (0.0, 0.0);
    for (k, m, f) in coeffs.iter() {
        let lambda = basis.lambda(k, m);
        if lambda.abs() < LAMBDA_FLOOR {
            return Err(Error::AmplificationOverflow { k, m, lambda });
        }
        let value = f / lambda;
        a.set(k, m, value);
        if m == 1 {
            principal += value * value;
        } else {
            rest += value * value;
        }
    }
    Ok(SolutionField {
        norm_sq: a.values.iter().map(|v| v * v).sum(),
        coefficients: a,
        norm_sq_principal: principal,
        norm_sq_rest: rest,
        evaluable: basis.spectrum().has_evaluable_basis(),
    })
}

/// Relative coefficient-space residual
/// `||lambda_km a_km - f~_km|| / ||f~||` (absolute when `f~ = 0`).
pub fn residual(u: &SolutionField, coeffs: &ModeCoefficients, basis: &ModeBasis) -> Result<f64> {
    if !u.coefficients.same_shape(coeffs) {
        return Err(Error::InvalidArgument(format!(
            "solution is {}x{}, data are {}x{}",
            u.coefficients.k_max(),
            u.coefficients.m_max(),
            coeffs.k_max(),
            coeffs.m_max()
        )));
    }
    check_against_basis(coeffs, basis)?;
    let diff: f64 = coeffs
        .iter()
        .map(|(k, m, f)| (basis.lambda(k, m) * u.coefficients.get(k, m) - f).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = coeffs.norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Data split into the span of `{u_k1 : k > p}` and its orthogonal
/// complement, on which the problem is stably solvable.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceSplit {
    pub p: usize,
    pub tilde_part: ModeCoefficients,
    pub hat_part: ModeCoefficients,
}

pub fn split_subspace(coeffs: &ModeCoefficients, p: usize) -> Result<SubspaceSplit> {
    if p == 0 || p > coeffs.k_max() {
        return Err(Error::InvalidArgument(format!(
            "cutoff p = {p} outside 1..={}",
            coeffs.k_max()
        )));
    }
    let mut tilde = ModeCoefficients::zeros(coeffs.k_max(), coeffs.m_max(), coeffs.provenance);
    let mut hat = coeffs.clone();
    for k in (p + 1)..=coeffs.k_max() {
        tilde.set(k, 1, coeffs.get(k, 1));
        hat.set(k, 1, 0.0);
    }
    Ok(SubspaceSplit {
        p,
        tilde_part: tilde,
        hat_part: hat,
    })
}

/// `max(4, max_{k <= p} 1/|lambda_k1|)`: bounds `||u|| / ||f||` on the
/// complement of the unstable directions, given `|lambda_km| >= 1/4` for
/// `m >= 2`.
pub fn stability_constant(basis: &ModeBasis, p: usize) -> f64 {
    basis
        .lambda1s()
        .iter()
        .take(p)
        .map(|l| 1.0 / l.abs())
        .fold(4.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct HadamardRow {
    pub k: usize,
    pub mu: f64,
    pub lambda_k1: Option<f64>,
    pub amplification: Option<f64>,
    pub solution_norm: Option<f64>,
    pub representable: bool,
}

/// For data `f~_k1 = epsilon` concentrated on one direction the solution has
/// norm `epsilon / lambda_k1`.
pub fn hadamard_amplification(
    spectrum: &OperatorSpectrum,
    k_list: &[usize],
    epsilon: f64,
    tol: f64,
) -> Result<Vec<HadamardRow>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    k_list
        .par_iter()
        .map(|&k| {
            let mu = spectrum
                .mu(k)
                .ok_or_else(|| Error::InvalidArgument(format!("k = {k} outside the spectrum")))?;
            match smallest_eigenvalue(mu, tol) {
                Ok(mode) => {
                    let amplification = 1.0 / mode.lambda.abs();
                    Ok(HadamardRow {
                        k,
                        mu,
                        lambda_k1: Some(mode.lambda),
                        amplification: Some(amplification),
                        solution_norm: Some(epsilon * amplification),
                        representable: true,
                    })
                }
                Err(Error::Underflow { .. }) => Ok(HadamardRow {
                    k,
                    mu,
                    lambda_k1: None,
                    amplification: None,
                    solution_norm: None,
                    representable: false,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
