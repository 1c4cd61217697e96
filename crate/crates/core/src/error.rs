use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("eigenvalue {mu} at index {k} violates the Friedrichs bound mu >= 1")]
    FriedrichsViolation { k: usize, mu: f64 },

    #[error("spectrum is not nondecreasing at index {k}: {mu} < {previous}")]
    Ordering { k: usize, mu: f64, previous: f64 },

    #[error(
        "hyperbolic argument {argument:.3} exceeds {limit}; use the log-scaled path (varpi) for this range"
    )]
    Range { argument: f64, limit: f64 },

    #[error("lambda = {lambda} is outside the open interval (0, {mu})")]
    Domain { mu: f64, lambda: f64 },

    #[error("sqrt(mu) = {sqrt_mu:.3} exceeds {limit}: the smallest eigenvalue underflows double precision")]
    Underflow { sqrt_mu: f64, limit: f64 },

    #[error("no sign change of the characteristic function found for mu = {mu} within |lambda| <= {scanned}")]
    NotFound { mu: f64, scanned: f64 },

    #[error("scan would need {evaluations} evaluations (budget {budget}); shrink the range or enlarge the step")]
    Budget { evaluations: u64, budget: u64 },

    #[error("sqrt(mu) = {sqrt_mu:.3} exceeds the oracle cap {limit}")]
    OracleRange { sqrt_mu: f64, limit: f64 },

    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal norm {off_diagonal:e}, target {target:e})")]
    Convergence {
        sweeps: usize,
        off_diagonal: f64,
        target: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("data violate the solvability criterion (verdict: divergent); pass the override to solve anyway")]
    RefusedIllPosed,

    #[error("|lambda_({k},{m})| = {lambda:e} is below 1e-290; 1/lambda overflows")]
    AmplificationOverflow { k: usize, m: usize, lambda: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
