//! The one-dimensional reflected-argument eigenproblem
//!
//! ```text
//! v''(t) - mu v(t) = lambda v(1 - t),   0 < t < 1,
//! v(0) = v'(0) = 0.
//! ```
//!
//! Splitting `v` into its parts even and odd about `t = 1/2` decouples the
//! equation into `s'' = (mu + lambda) s` and `d'' = (mu - lambda) d`, so every
//! solution is a combination of the two evolution functions
//!
//! ```text
//! E(alpha, tau) = cosh(sqrt(alpha) tau)           (cos for alpha < 0)
//! O(alpha, tau) = sinh(sqrt(alpha) tau) / sqrt(alpha)   (sin/.. for alpha < 0)
//! ```
//!
//! evaluated at `tau = t - 1/2`. Both are entire in `alpha`, which lets the
//! characteristic function
//!
//! ```text
//! Phi(mu, lambda) = E(mu+lambda, 1/2) E(mu-lambda, 1/2)
//!                 - (mu+lambda) O(mu+lambda, 1/2) O(mu-lambda, 1/2)
//! ```
//!
//! pass smoothly from the hyperbolic regime `|lambda| < mu` into the
//! trigonometric branches `|lambda| > mu` without a spurious root at
//! `lambda = mu`.
//!
//! For large `mu` the smallest eigenvalue behaves like `4 mu exp(-sqrt(mu))`
//! and is located through the log-scaled function [`varpi`] instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect, safeguarded_newton};

/// Largest hyperbolic argument `(sqrt(mu+lambda) + sqrt(mu-lambda)) / 2`
/// accepted by [`char_fn`].
pub const HYPERBOLIC_LIMIT: f64 = 700.0;

/// Largest `sqrt(mu)` for which the smallest eigenvalue is representable.
pub const SQRT_MU_CAP: f64 = 600.0;

/// Maximum number of characteristic-function evaluations in one scan.
pub const SCAN_BUDGET: u64 = 1_000_000;

/// Even evolution function `E(alpha, tau)`.
pub fn even_evolution(alpha: f64, tau: f64) -> f64 {
    if alpha >= 0.0 {
        (alpha.sqrt() * tau).cosh()
    } else {
        ((-alpha).sqrt() * tau).cos()
    }
}

/// Odd evolution function `O(alpha, tau)`; `tau` at `alpha = 0`.
pub fn odd_evolution(alpha: f64, tau: f64) -> f64 {
    if alpha > 0.0 {
        let s = alpha.sqrt();
        (s * tau).sinh() / s
    } else if alpha < 0.0 {
        let s = (-alpha).sqrt();
        (s * tau).sin() / s
    } else {
        tau
    }
}

// `E` and `O` divided by exp(sqrt(alpha)/2) when alpha > 0, so they stay O(1)
// on |tau| <= 1/2 no matter how large alpha is.
fn even_scaled(alpha: f64, tau: f64) -> f64 {
    if alpha > 0.0 {
        let s = alpha.sqrt();
        0.5 * ((s * (tau - 0.5)).exp() + (-s * (tau + 0.5)).exp())
    } else {
        even_evolution(alpha, tau)
    }
}

fn odd_scaled(alpha: f64, tau: f64) -> f64 {
    if alpha > 0.0 {
        let s = alpha.sqrt();
        if s < 1.0 {
            (s * tau).sinh() / s * (-0.5 * s).exp()
        } else {
            ((s * (tau - 0.5)).exp() - (-s * (tau + 0.5)).exp()) / (2.0 * s)
        }
    } else {
        odd_evolution(alpha, tau)
    }
}

// Integral over tau in [-1/2, 1/2] of even_scaled(alpha, tau)^2.
fn even_scaled_sq_integral(alpha: f64) -> f64 {
    if alpha > 0.0 {
        let s = alpha.sqrt();
        0.5 * (-s).exp() + (-(-2.0 * s).exp_m1()) / (4.0 * s)
    } else if alpha < 0.0 {
        let s = (-alpha).sqrt();
        0.5 + s.sin() / (2.0 * s)
    } else {
        1.0
    }
}

// Integral over tau in [-1/2, 1/2] of odd_scaled(alpha, tau)^2.
fn odd_scaled_sq_integral(alpha: f64) -> f64 {
    if alpha.abs() < 1.0 {
        // sum_j alpha^j / (2 (2j+3)!), entire in alpha
        let mut term = 1.0 / 12.0;
        let mut sum = term;
        for j in 0..30 {
            let jf = j as f64;
            term *= alpha / ((2.0 * jf + 4.0) * (2.0 * jf + 5.0));
            sum += term;
        }
        if alpha > 0.0 {
            sum * (-alpha.sqrt()).exp()
        } else {
            sum
        }
    } else if alpha > 0.0 {
        let s = alpha.sqrt();
        (-(-2.0 * s).exp_m1() / 2.0 - s * (-s).exp()) / (2.0 * s * s * s)
    } else {
        let s = (-alpha).sqrt();
        (s - s.sin()) / (2.0 * s * s * s)
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} must be finite and at least 1"
        )));
    }
    Ok(())
}

fn hyperbolic_argument(mu: f64, lambda: f64) -> f64 {
    ((mu + lambda).max(0.0).sqrt() + (mu - lambda).max(0.0).sqrt()) / 2.0
}

/// Regularized characteristic function `Phi(mu, lambda)`; its zeros are
/// exactly the eigenvalues. `Phi(mu, 0) = 1`.
pub fn char_fn(mu: f64, lambda: f64) -> Result<f64> {
    check_mu(mu)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} is not finite"
        )));
    }
    let argument = hyperbolic_argument(mu, lambda);
    if argument > HYPERBOLIC_LIMIT {
        return Err(Error::Range {
            argument,
            limit: HYPERBOLIC_LIMIT,
        });
    }
    Ok(char_fn_unchecked(mu, lambda))
}

fn char_fn_unchecked(mu: f64, lambda: f64) -> f64 {
    let p = mu + lambda;
    let q = mu - lambda;
    if p > 0.0 && q > 0.0 {
        let b = q.sqrt() / 2.0;
        if b >= 0.5 {
            // With a = sqrt(p)/2: Phi = cosh a cosh b - (a/b) sinh a sinh b
            //   = (s cosh d - d cosh s) / (2b),  s = a + b, d = a - b.
            // cosh^2 - sinh^2 style cancellation is gone; d is formed
            // without subtracting a and b.
            let s = p.sqrt() / 2.0 + b;
            let d = lambda / (2.0 * s);
            return (s * d.cosh() - d * s.cosh()) / (2.0 * b);
        }
    }
    even_evolution(p, 0.5) * even_evolution(q, 0.5)
        - p * odd_evolution(p, 0.5) * odd_evolution(q, 0.5)
}

fn ln_coth(x: f64) -> f64 {
    let e = (-2.0 * x).exp();
    e.ln_1p() - (-e).ln_1p()
}

fn check_varpi_domain(mu: f64, lambda: f64) -> Result<()> {
    check_mu(mu)?;
    if mu.sqrt() > SQRT_MU_CAP {
        return Err(Error::Underflow {
            sqrt_mu: mu.sqrt(),
            limit: SQRT_MU_CAP,
        });
    }
    if !(lambda > 0.0 && lambda < mu) {
        return Err(Error::Domain { mu, lambda });
    }
    Ok(())
}

/// Log-scaled characteristic function on `0 < lambda < mu`:
///
/// ```text
/// varpi(lambda) = ln coth(sqrt(mu+lambda)/2) + ln coth(sqrt(mu-lambda)/2)
///               - 1/2 ln((mu+lambda)/(mu-lambda))
/// ```
///
/// It vanishes where `Phi` does but never leaves the `exp(-sqrt(mu))` scale,
/// so it resolves the smallest eigenvalue up to `sqrt(mu) = 600`.
pub fn varpi(mu: f64, lambda: f64) -> Result<f64> {
    check_varpi_domain(mu, lambda)?;
    let a = (mu + lambda).sqrt() / 2.0;
    let b = (mu - lambda).sqrt() / 2.0;
    Ok(ln_coth(a) + ln_coth(b) - (lambda / mu).atanh())
}

/// `d varpi / d lambda`; equals `-1/mu` at `lambda = 0`.
pub fn varpi_derivative(mu: f64, lambda: f64) -> Result<f64> {
    check_varpi_domain(mu, lambda)?;
    let a = (mu + lambda).sqrt() / 2.0;
    let b = (mu - lambda).sqrt() / 2.0;
    // 1/sinh(2x) without overflow
    let csch2 = |x: f64| 2.0 * (-2.0 * x).exp() / -(-4.0 * x).exp_m1();
    Ok(-csch2(a) / (4.0 * a) + csch2(b) / (4.0 * b) - mu / ((mu - lambda) * (mu + lambda)))
}

/// Right end of the interval on which `varpi` is monotone, with the free
/// constant fixed at one half: `mu / (4 mu + 1/2)`.
pub fn monotonicity_bound(mu: f64) -> f64 {
    mu / (4.0 * mu + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticLambda1 {
    /// `4 mu exp(-sqrt(mu))`
    pub leading: f64,
    /// `2 mu ln coth(sqrt(mu)/2)`, the zero of the linearization of `varpi`.
    pub refined: f64,
}

pub fn asymptotic_lambda1(mu: f64) -> Result<AsymptoticLambda1> {
    check_mu(mu)?;
    let sqrt_mu = mu.sqrt();
    if sqrt_mu > SQRT_MU_CAP {
        return Err(Error::Underflow {
            sqrt_mu,
            limit: SQRT_MU_CAP,
        });
    }
    Ok(AsymptoticLambda1 {
        leading: 4.0 * mu * (-sqrt_mu).exp(),
        refined: 2.0 * mu * ln_coth(sqrt_mu / 2.0),
    })
}

/// One eigenpair of the reflected-argument problem for a fixed `mu`.
///
/// The eigenfunction is stored through the analytic coefficients of
/// `v(t) = (c1 E(mu+lambda, t-1/2) + c2 O(mu-lambda, t-1/2)) / norm`, with
/// `E`, `O` rescaled by `exp(-sqrt(alpha)/2)` for positive `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviatingMode {
    pub mu: f64,
    /// Rank by increasing `|lambda|`, starting at 1.
    pub m: usize,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub norm: f64,
}

impl DeviatingMode {
    /// Builds the normalized eigenfunction for a root `lambda` of `Phi`.
    /// Sign is fixed so that `v(1) > 0`.
    pub fn from_root(mu: f64, m: usize, lambda: f64) -> Result<Self> {
        check_mu(mu)?;
        let p = mu + lambda;
        let q = mu - lambda;
        let argument = hyperbolic_argument(mu, lambda);
        if argument > HYPERBOLIC_LIMIT {
            return Err(Error::Range {
                argument,
                limit: HYPERBOLIC_LIMIT,
            });
        }
        let norm_of = |c1: f64, c2: f64| {
            (c1 * c1 * even_scaled_sq_integral(p) + c2 * c2 * odd_scaled_sq_integral(q)).sqrt()
        };
        // v(0) = 0 fixes (c1, c2) up to scale; the v'(0) = 0 row gives the
        // same direction at a root and takes over if the first pair vanishes.
        let (mut c1, mut c2) = (odd_scaled(q, 0.5), even_scaled(p, 0.5));
        let mut norm = norm_of(c1, c2);
        let (alt1, alt2) = (even_scaled(q, 0.5), p * odd_scaled(p, 0.5));
        let alt_norm = norm_of(alt1, alt2);
        if norm < 1e-6 * alt_norm {
            c1 = alt1;
            c2 = alt2;
            norm = alt_norm;
        }
        let mut mode = Self {
            mu,
            m,
            lambda,
            c1,
            c2,
            norm,
        };
        let end = mode.value(1.0);
        let flip = if end != 0.0 {
            end < 0.0
        } else {
            mode.derivative(1.0) < 0.0
        };
        if flip {
            mode.c1 = -mode.c1;
            mode.c2 = -mode.c2;
        }
        Ok(mode)
    }

    fn value(&self, t: f64) -> f64 {
        let tau = t - 0.5;
        (self.c1 * even_scaled(self.mu + self.lambda, tau)
            + self.c2 * odd_scaled(self.mu - self.lambda, tau))
            / self.norm
    }

    /// `v'(t)`, using `dE/dtau = alpha O` and `dO/dtau = E`.
    pub fn derivative(&self, t: f64) -> f64 {
        let tau = t - 0.5;
        let p = self.mu + self.lambda;
        (self.c1 * p * odd_scaled(p, tau) + self.c2 * even_scaled(self.mu - self.lambda, tau))
            / self.norm
    }

    /// `|Phi(mu, lambda)|`.
    pub fn residual(&self) -> f64 {
        char_fn_unchecked(self.mu, self.lambda).abs()
    }

    /// Evaluates the normalized eigenfunction on `[0, 1]`.
    pub fn eigenfunction(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
        }
        Ok(self.value(t))
    }

    /// Same as [`eigenfunction`](Self::eigenfunction) without the domain
    /// check, for tight quadrature loops.
    pub fn eval(&self, t: f64) -> f64 {
        self.value(t)
    }
}

/// Smallest-`|lambda|` eigenpair (`m = 1`).
///
/// When `2 mu ln coth(sqrt(mu)/2) < mu/5` the root of [`varpi`] is bracketed
/// around that estimate and polished by safeguarded Newton to relative `tol`.
/// Otherwise (small `mu`, where the asymptotics do not apply) `Phi` is
/// scanned outward until the first sign change.
pub fn smallest_eigenvalue(mu: f64, tol: f64) -> Result<DeviatingMode> {
    check_mu(mu)?;
    if !(tol >= 1e-14) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} below 1e-14"
        )));
    }
    let estimate = asymptotic_lambda1(mu)?.refined;
    if estimate < mu / 5.0 {
        let lo = 0.5 * estimate;
        let hi = (2.0 * estimate).min(0.5 * mu);
        if lo < hi && varpi(mu, lo)? > 0.0 && varpi(mu, hi)? < 0.0 {
            let lambda = safeguarded_newton(
                |x| Ok::<_, Error>((varpi(mu, x)?, varpi_derivative(mu, x)?)),
                lo,
                hi,
                estimate,
                tol,
            )?;
            return DeviatingMode::from_root(mu, 1, lambda);
        }
    }

    let mut limit = (2.0 * mu).max(16.0);
    loop {
        match eigenvalues(mu, limit, 1) {
            Ok(mut modes) if !modes.is_empty() => return Ok(modes.remove(0)),
            Ok(_) => limit *= 2.0,
            Err(Error::Budget { .. } | Error::Range { .. }) => {
                return Err(Error::NotFound {
                    mu,
                    scanned: limit / 2.0,
                })
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ScanOptions {
    /// Uniform scan step; `None` means `min(1, lambda_abs_max / 2048)`.
    pub step: Option<f64>,
}

impl ScanOptions {
    pub fn step_for(&self, lambda_abs_max: f64) -> f64 {
        self.step
            .unwrap_or_else(|| (lambda_abs_max / 2048.0).min(1.0))
    }
}

/// All eigenvalues with `|lambda| <= lambda_abs_max`, sorted by `|lambda|`,
/// capped at `max_count`. Roots closer together than the scan step (or of
/// even multiplicity) are not resolved.
pub fn eigenvalues(mu: f64, lambda_abs_max: f64, max_count: usize) -> Result<Vec<DeviatingMode>> {
    eigenvalues_with(mu, lambda_abs_max, max_count, &ScanOptions::default())
}

pub fn eigenvalues_with(
    mu: f64,
    lambda_abs_max: f64,
    max_count: usize,
    options: &ScanOptions,
) -> Result<Vec<DeviatingMode>> {
    let roots = scan_roots(mu, lambda_abs_max, options)?;
    roots
        .into_iter()
        .take(max_count)
        .enumerate()
        .map(|(i, lambda)| DeviatingMode::from_root(mu, i + 1, lambda))
        .collect()
}

/// The `count` smallest-`|lambda|` eigenpairs, widening the scan window until
/// enough roots are inside it.
pub fn lowest_modes(mu: f64, count: usize, options: &ScanOptions) -> Result<Vec<DeviatingMode>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut extra = 64.0;
    loop {
        let limit = mu + extra;
        let roots = scan_roots(mu, limit, options)?;
        if roots.len() >= count {
            return roots
                .into_iter()
                .take(count)
                .enumerate()
                .map(|(i, lambda)| DeviatingMode::from_root(mu, i + 1, lambda))
                .collect();
        }
        extra *= 2.0;
    }
}

fn scan_roots(mu: f64, lambda_abs_max: f64, options: &ScanOptions) -> Result<Vec<f64>> {
    check_mu(mu)?;
    if !(lambda_abs_max > 0.0) || !lambda_abs_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda_abs_max = {lambda_abs_max} must be positive"
        )));
    }
    let step = options.step_for(lambda_abs_max);
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scan step {step} must be positive"
        )));
    }
    let intervals = (2.0 * lambda_abs_max / step).ceil();
    let evaluations = intervals as u64 + 1;
    if intervals >= SCAN_BUDGET as f64 {
        return Err(Error::Budget {
            evaluations,
            budget: SCAN_BUDGET,
        });
    }
    let intervals = intervals as usize;
    for edge in [-lambda_abs_max, lambda_abs_max] {
        char_fn(mu, edge)?;
    }

    let node = |i: usize| {
        if i == intervals {
            lambda_abs_max
        } else {
            -lambda_abs_max + i as f64 * step
        }
    };
    let values: Vec<f64> = (0..=intervals)
        .map(|i| char_fn_unchecked(mu, node(i)))
        .collect();

    let mut roots = Vec::new();
    for i in 0..intervals {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            roots.push(node(i));
        } else if (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 {
            let r = bisect(
                |x| Ok::<_, Error>(char_fn_unchecked(mu, x)),
                node(i),
                node(i + 1),
                f0,
                f1,
            )?;
            roots.push(r);
        }
    }
    if values[intervals] == 0.0 {
        roots.push(node(intervals));
    }
    roots.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson_fn;

    // High-precision (50-digit) reference roots of varpi and closed forms.
    const LAMBDA1_MU25: f64 = 0.675_487_022_179_606_1;
    const LAMBDA1_MU100: f64 = 0.018_159_979_952_557_68;
    const VARPI0_MU25: f64 = 0.026_952_195_877_213_253;

    #[test]
    fn evolution_helpers_are_smooth_across_zero() {
        for tau in [-0.5, -0.2, 0.1, 0.5] {
            let e_minus = even_evolution(-1e-9, tau);
            let e_plus = even_evolution(1e-9, tau);
            assert!((e_minus - e_plus).abs() < 1e-9);
            assert!((odd_evolution(-1e-9, tau) - odd_evolution(1e-9, tau)).abs() < 1e-9);
            assert_eq!(odd_evolution(0.0, tau), tau);
        }
    }

    #[test]
    fn evolution_derivative_identities() {
        let h = 1e-6;
        for alpha in [-40.0, -1.0, 0.0, 0.3, 25.0] {
            for tau in [-0.4, 0.0, 0.25] {
                let de =
                    (even_evolution(alpha, tau + h) - even_evolution(alpha, tau - h)) / (2.0 * h);
                let dodd =
                    (odd_evolution(alpha, tau + h) - odd_evolution(alpha, tau - h)) / (2.0 * h);
                assert!(
                    (de - alpha * odd_evolution(alpha, tau)).abs() < 1e-6,
                    "{alpha} {tau}"
                );
                assert!(
                    (dodd - even_evolution(alpha, tau)).abs() < 1e-6,
                    "{alpha} {tau}"
                );
            }
        }
    }

    #[test]
    fn scaled_integrals_match_quadrature() {
        for alpha in [-200.0, -3.0, -0.5, 0.0, 1e-7, 0.5, 2.0, 90.0, 2500.0] {
            let ie = simpson_fn(|t| even_scaled(alpha, t).powi(2), -0.5, 0.5, 16384);
            let io = simpson_fn(|t| odd_scaled(alpha, t).powi(2), -0.5, 0.5, 16384);
            assert!(
                (ie - even_scaled_sq_integral(alpha)).abs() <= 1e-10 * ie.max(1e-300),
                "{alpha}"
            );
            assert!(
                (io - odd_scaled_sq_integral(alpha)).abs() <= 1e-10 * io.max(1e-300),
                "{alpha}"
            );
        }
    }

    #[test]
    fn char_fn_at_zero_is_one() {
        assert!((char_fn(25.0, 0.0).unwrap() - 1.0).abs() <= 1e-12);
        for mu in [1.0, 2.0, 1e3, 1e5] {
            assert!((char_fn(mu, 0.0).unwrap() - 1.0).abs() <= 1e-12, "{mu}");
        }
    }

    #[test]
    fn char_fn_brackets_mu1_root() {
        let a = char_fn(1.0, 3.0).unwrap();
        let b = char_fn(1.0, 3.5).unwrap();
        assert!(a * b < 0.0, "{a} {b}");
    }

    #[test]
    fn no_spurious_root_at_lambda_equal_mu() {
        let v = char_fn(25.0, 25.0).unwrap();
        assert!(v.abs() > 0.1, "{v}");
    }

    #[test]
    fn char_fn_continuous_across_branch_points() {
        for mu in [1.0, 4.0, 25.0] {
            for lambda0 in [mu, -mu] {
                let mut last = f64::INFINITY;
                for e in [1e-3, 1e-5, 1e-7, 1e-9] {
                    let jump = (char_fn(mu, lambda0 - e).unwrap()
                        - char_fn(mu, lambda0 + e).unwrap())
                    .abs();
                    assert!(jump <= last + 1e-12);
                    last = jump;
                }
                assert!(last < 1e-6, "mu {mu} at {lambda0}: {last}");
            }
        }
    }

    #[test]
    fn char_fn_overflow_guard() {
        assert!(matches!(char_fn(1e6, 0.0), Err(Error::Range { .. })));
        assert!(matches!(char_fn(0.5, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn varpi_at_origin_and_slope() {
        // 2 ln((e^5 + 1)/(e^5 - 1))
        let closed = 2.0 * ((5f64.exp() + 1.0) / (5f64.exp() - 1.0)).ln();
        let tiny = 1e-12;
        let v0 = varpi(25.0, tiny).unwrap();
        assert!((v0 - closed).abs() < 1e-12);
        assert!((v0 - VARPI0_MU25).abs() < 1e-12);

        let h = 1e-6 * 25.0;
        let slope = (varpi(25.0, h).unwrap() - varpi(25.0, tiny).unwrap()) / (h - tiny);
        assert!((slope + 1.0 / 25.0).abs() < 1e-6, "{slope}");
        assert!((varpi_derivative(25.0, tiny).unwrap() + 0.04).abs() < 1e-10);
    }

    #[test]
    fn varpi_near_linearized_zero() {
        // The linearized zero sits 0.25% from the true root at mu = 25;
        // varpi there is 6.6966e-5 (50-digit reference).
        let refined = asymptotic_lambda1(25.0).unwrap().refined;
        let v = varpi(25.0, refined).unwrap();
        assert!((v - 6.6966e-5).abs() < 1e-8, "{v}");
        let v100 = varpi(100.0, asymptotic_lambda1(100.0).unwrap().refined).unwrap();
        assert!(v100.abs() < 1e-9, "{v100}");
    }

    #[test]
    fn varpi_domain_errors() {
        assert!(matches!(varpi(25.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(varpi(25.0, 25.0), Err(Error::Domain { .. })));
        assert!(matches!(
            varpi(601.0 * 601.0, 1.0),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn varpi_derivative_matches_finite_difference() {
        for (mu, lambda) in [(25.0, 0.1), (100.0, 3.0), (400.0, 1e-4), (4.0, 1.5)] {
            let h = 1e-6 * lambda;
            let fd = (varpi(mu, lambda + h).unwrap() - varpi(mu, lambda - h).unwrap()) / (2.0 * h);
            let an = varpi_derivative(mu, lambda).unwrap();
            assert!(
                (fd - an).abs() <= 1e-6 * an.abs(),
                "{mu} {lambda}: {fd} vs {an}"
            );
        }
    }

    #[test]
    fn varpi_decreasing_below_monotonicity_bound() {
        for mu in [25.0, 100.0, 400.0] {
            let l0 = monotonicity_bound(mu);
            let samples: Vec<f64> = (1..=100)
                .map(|i| varpi(mu, l0 * i as f64 / 100.5).unwrap())
                .collect();
            assert!(samples.windows(2).all(|w| w[1] < w[0]), "mu {mu}");
        }
    }

    #[test]
    fn asymptotic_formulas() {
        let a = asymptotic_lambda1(100.0).unwrap();
        let e10 = 4.539_992_976_248_485e-5;
        assert!((a.leading - 400.0 * e10).abs() < 1e-15);
        assert!((a.leading - 1.8160e-2).abs() < 1e-6);
        assert!((a.refined - 0.018_159_971_917_470_77).abs() < 1e-15);

        let a25 = asymptotic_lambda1(25.0).unwrap();
        assert!((a25.refined - 0.673_804_896_930_331_3).abs() < 1e-14);
        let ratio = a25.refined / a25.leading - 1.0;
        let predicted = (-10f64).exp() / 3.0;
        assert!(
            (ratio - predicted).abs() < 1e-3 * predicted,
            "{ratio} vs {predicted}"
        );
        assert!(matches!(
            asymptotic_lambda1(601.0 * 601.0),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn smallest_eigenvalue_values() {
        let m100 = smallest_eigenvalue(100.0, 1e-12).unwrap();
        assert!((m100.lambda - LAMBDA1_MU100).abs() < 1e-13 * LAMBDA1_MU100);
        let refined = asymptotic_lambda1(100.0).unwrap().refined;
        assert!((m100.lambda / refined - 1.0).abs() < 1e-3);
        assert!(m100.residual() < 1e-10);

        let m1 = smallest_eigenvalue(1.0, 1e-12).unwrap();
        assert!(m1.lambda > 3.0 && m1.lambda < 3.5, "{}", m1.lambda);

        let m25 = smallest_eigenvalue(25.0, 1e-12).unwrap();
        assert!((m25.lambda - LAMBDA1_MU25).abs() < 1e-12);
        assert_eq!(m25.m, 1);
    }

    #[test]
    fn smallest_eigenvalue_extreme_mu() {
        let mu = 600.0f64 * 600.0;
        let m = smallest_eigenvalue(mu, 1e-12).unwrap();
        let lead = asymptotic_lambda1(mu).unwrap().leading;
        assert!(m.lambda > 0.0 && (m.lambda / lead - 1.0).abs() < 1e-10);
        assert!(matches!(
            smallest_eigenvalue(601.0 * 601.0, 1e-12),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn scan_and_varpi_agree() {
        for mu in [16.0, 36.0, 100.0, 400.0] {
            let scanned = eigenvalues(mu, mu + 100.0, 1).unwrap();
            let direct = smallest_eigenvalue(mu, 1e-13).unwrap();
            assert!(
                (scanned[0].lambda / direct.lambda - 1.0).abs() < 1e-10,
                "mu {mu}"
            );
        }
    }

    #[test]
    fn spectrum_ordering_and_signs() {
        let modes = eigenvalues(25.0, 700.0, 8).unwrap();
        assert_eq!(modes.len(), 8);
        for (i, w) in modes.windows(2).enumerate() {
            assert!(w[0].lambda.abs() <= w[1].lambda.abs());
            assert_eq!(w[0].m, i + 1);
        }
        // second-smallest positive eigenvalue; oracle (n = 400) gives 81.9085
        let second_positive = modes
            .iter()
            .filter(|m| m.lambda > 0.0)
            .nth(1)
            .unwrap()
            .lambda;
        assert!(
            (second_positive - 81.910_2).abs() < 1e-3,
            "{second_positive}"
        );
        for m in &modes[1..] {
            assert!(m.lambda.abs() > 0.25);
        }
        assert!(modes.iter().any(|m| m.lambda < 0.0));
    }

    #[test]
    fn scan_budget() {
        let opts = ScanOptions { step: Some(1e-4) };
        assert!(matches!(
            eigenvalues_with(4.0, 100.0, 5, &opts),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn eigenfunction_boundary_conditions() {
        for mu in [1.0, 4.0, 25.0, 100.0] {
            for mode in eigenvalues(mu, mu + 400.0, 6).unwrap() {
                let v0 = mode.eigenfunction(0.0).unwrap();
                assert!(v0.abs() <= 1e-12, "mu {mu} m {} v(0) = {v0}", mode.m);
                let h = 1e-6;
                let dv0 = (mode.eval(h) - mode.eval(-h)) / (2.0 * h);
                let vmax = (0..=200)
                    .map(|i| mode.eval(i as f64 / 200.0).abs())
                    .fold(0.0, f64::max);
                assert!(
                    dv0.abs() <= 1e-4 * vmax,
                    "mu {mu} m {} v'(0) = {dv0}",
                    mode.m
                );
                assert!(mode.eval(1.0) > 0.0);
                let n = simpson_fn(|t| mode.eval(t).powi(2), 0.0, 1.0, 4096);
                assert!((n - 1.0).abs() < 1e-8, "mu {mu} m {} norm {n}", mode.m);
            }
        }
        assert!(smallest_eigenvalue(4.0, 1e-12)
            .unwrap()
            .eigenfunction(1.5)
            .is_err());
    }

    #[test]
    fn eigenfunction_solves_the_equation() {
        let mode = smallest_eigenvalue(4.0, 1e-13).unwrap();
        let h = 1e-4;
        for i in 1..=9 {
            let t = i as f64 / 10.0;
            let d2 = (-mode.eval(t + 2.0 * h) + 16.0 * mode.eval(t + h) - 30.0 * mode.eval(t)
                + 16.0 * mode.eval(t - h)
                - mode.eval(t - 2.0 * h))
                / (12.0 * h * h);
            let r = d2 - 4.0 * mode.eval(t) - mode.lambda * mode.eval(1.0 - t);
            assert!(r.abs() <= 1e-5, "t {t}: {r}");
        }
    }

    #[test]
    fn modes_are_orthonormal() {
        for mu in [4.0, 25.0] {
            let modes = lowest_modes(mu, 8, &ScanOptions::default()).unwrap();
            for a in &modes {
                for b in &modes {
                    let g = simpson_fn(|t| a.eval(t) * b.eval(t), 0.0, 1.0, 2048);
                    let want = if a.m == b.m { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-6, "mu {mu} ({}, {}) -> {g}", a.m, b.m);
                }
            }
        }
    }
}
