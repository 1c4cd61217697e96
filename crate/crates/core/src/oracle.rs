//! Brute-force check on the analytic spectrum.
//!
//! Inverting `v'' - mu v = g` with `v(0) = v'(0) = 0` and composing with the
//! reflection `t -> 1 - t` gives a symmetric integral operator with kernel
//!
//! ```text
//! m(t, s) = sinh(sqrt(mu) (t + s - 1)) / sqrt(mu)   for t + s > 1, else 0.
//! ```
//!
//! Its eigenvalues are `1/lambda`. A midpoint-rule Nyström matrix keeps the
//! discrete operator exactly symmetric, and [`crate::jacobi`] diagonalizes it
//! without touching any code from the analytic path.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{
    jacobi_eigen, jacobi_eigenvalues, DenseMatrix, EigenDecomposition, DEFAULT_MAX_SWEEPS,
};

/// Beyond this `sqrt(mu)` the kernel spans more than `e^40` and small
/// eigenvalues drown in rounding.
pub const ORACLE_SQRT_MU_CAP: f64 = 40.0;
pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 4096;
/// Relative off-diagonal tolerance used for the oracle's Jacobi runs.
pub const ORACLE_JACOBI_TOL: f64 = 1e-13;

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} must be positive"
        )));
    }
    if mu.sqrt() > ORACLE_SQRT_MU_CAP {
        return Err(Error::OracleRange {
            sqrt_mu: mu.sqrt(),
            limit: ORACLE_SQRT_MU_CAP,
        });
    }
    Ok(())
}

/// Kernel of the reflected inverse operator.
pub fn composed_kernel(mu: f64, t: f64, s: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "(t, s) = ({t}, {s}) outside [0, 1]^2"
        )));
    }
    Ok(kernel_of_sum(mu.sqrt(), t + s))
}

#[inline]
fn kernel_of_sum(sqrt_mu: f64, sum: f64) -> f64 {
    if sum > 1.0 {
        (sqrt_mu * (sum - 1.0)).sinh() / sqrt_mu
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelMatrix {
    pub mu: f64,
    pub n: usize,
    pub h: f64,
    /// Midpoints `(i - 1/2) h`, `i = 1..=n`.
    pub nodes: Vec<f64>,
    /// `h * m(t_i, t_j)`.
    pub entries: DenseMatrix,
}

/// Midpoint Nyström matrix on `n` cells.
pub fn build_matrix(mu: f64, n: usize) -> Result<KernelMatrix> {
    check_mu(mu)?;
    if !(MIN_GRID..=MAX_GRID).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "grid size {n} outside {MIN_GRID}..={MAX_GRID}"
        )));
    }
    let h = 1.0 / n as f64;
    let sqrt_mu = mu.sqrt();
    // t_i + t_j = (i + j + 1) h with 0-based indices: entries depend on i + j
    // only, so the matrix is symmetric bit for bit and the support test is
    // exact integer arithmetic.
    let by_sum: Vec<f64> = (0..2 * n - 1)
        .map(|ij| {
            if ij + 1 > n {
                h * kernel_of_sum(sqrt_mu, (ij + 1) as f64 * h)
            } else {
                0.0
            }
        })
        .collect();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, x) in row.iter_mut().enumerate() {
            *x = by_sum[i + j];
        }
    });
    Ok(KernelMatrix {
        mu,
        n,
        h,
        nodes: (0..n).map(|i| (i as f64 + 0.5) * h).collect(),
        entries: DenseMatrix::from_row_major(n, data)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OraclePair {
    pub lambda: f64,
    /// Grid function on the midpoints, `sum v_i^2 h = 1`, last value positive.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSpectrum {
    pub mu: f64,
    pub n: usize,
    /// Sorted by increasing `|lambda|`.
    pub pairs: Vec<OraclePair>,
    /// Set when fewer trustworthy eigenvalues exist than were requested.
    pub truncated: bool,
}

impl OracleSpectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }
}

/// `lambda = 1/nu` for the `count` largest-`|nu|` matrix eigenvalues, with
/// eigenvectors.
pub fn oracle_lambdas(mu: f64, n: usize, count: usize) -> Result<OracleSpectrum> {
    let matrix = build_matrix(mu, n)?;
    let decomposition = jacobi_eigen(&matrix.entries, ORACLE_JACOBI_TOL, DEFAULT_MAX_SWEEPS)?;
    Ok(collect(&matrix, &decomposition, count))
}

/// Eigenvalues only (vectors left empty); skips rotation accumulation.
pub fn oracle_eigenvalues(mu: f64, n: usize, count: usize) -> Result<OracleSpectrum> {
    let matrix = build_matrix(mu, n)?;
    let decomposition = jacobi_eigenvalues(&matrix.entries, ORACLE_JACOBI_TOL, DEFAULT_MAX_SWEEPS)?;
    Ok(collect(&matrix, &decomposition, count))
}

fn collect(
    matrix: &KernelMatrix,
    decomposition: &EigenDecomposition,
    count: usize,
) -> OracleSpectrum {
    let n = matrix.n;
    let largest = decomposition.eigenvalues.first().map_or(0.0, |v| v.abs());
    let floor = 1e-12 * largest;
    let trusted = decomposition
        .eigenvalues
        .iter()
        .take_while(|nu| nu.abs() > floor)
        .count();
    let take = count.min(trusted).min(n);
    let scale = 1.0 / matrix.h.sqrt();
    let pairs = (0..take)
        .map(|i| {
            let nu = decomposition.eigenvalues[i];
            let vector = match &decomposition.eigenvectors {
                Some(v) => {
                    let mut column: Vec<f64> = v.column(i).iter().map(|x| x * scale).collect();
                    if column[n - 1] < 0.0 {
                        column.iter_mut().for_each(|x| *x = -*x);
                    }
                    column
                }
                None => Vec::new(),
            };
            OraclePair {
                lambda: 1.0 / nu,
                vector,
            }
        })
        .collect();
    OracleSpectrum {
        mu: matrix.mu,
        n,
        pairs,
        truncated: take < count,
    }
}

/// `int_0^1 int_0^1 m(t, s)^2 dt ds` in closed form.
pub fn hilbert_schmidt_norm_sq(mu: f64) -> f64 {
    let c = mu.sqrt();
    ((2.0 * c).cosh() - 1.0) / (4.0 * mu) * 0.5 / mu - 0.25 / mu
}

/// `int_0^1 m(t, t) dt = (cosh(sqrt(mu)) - 1) / (2 mu)`.
pub fn kernel_trace(mu: f64) -> f64 {
    (mu.sqrt().cosh() - 1.0) / (2.0 * mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson_fn;

    #[test]
    fn kernel_values() {
        assert_eq!(composed_kernel(4.0, 0.3, 0.5).unwrap(), 0.0);
        let v = composed_kernel(4.0, 0.75, 0.75).unwrap();
        assert!((v - 0.587_600_596_821_900_7).abs() < 1e-15);
        assert_eq!(
            composed_kernel(4.0, 0.9, 0.6).unwrap(),
            composed_kernel(4.0, 0.6, 0.9).unwrap()
        );
        assert!(matches!(
            composed_kernel(1700.0, 0.5, 0.9),
            Err(Error::OracleRange { .. })
        ));
        assert!(composed_kernel(4.0, 1.2, 0.5).is_err());
    }

    #[test]
    fn matrix_shape_and_symmetry() {
        let m = build_matrix(9.0, 37).unwrap();
        assert!(m.entries.is_symmetric());
        assert_eq!(m.entries, m.entries.transpose());
        assert!(matches!(
            build_matrix(1.0, 8),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_matrix(1.0, 5000),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn trace_matches_closed_form() {
        let m = build_matrix(1.0, 16).unwrap();
        let exact = kernel_trace(1.0);
        assert!((exact - 0.271_540_317_407_621_9).abs() < 1e-15);
        assert!((m.entries.trace() - exact).abs() < 0.01 * exact);
    }

    #[test]
    fn hilbert_schmidt_closed_form_against_quadrature() {
        for mu in [1.0, 4.0, 25.0] {
            let c: f64 = f64::sqrt(mu);
            // one-dimensional reduction over u = t + s - 1
            let q = simpson_fn(|u| (1.0 - u) * ((c * u).sinh() / c).powi(2), 0.0, 1.0, 2000);
            let exact = hilbert_schmidt_norm_sq(mu);
            assert!((q - exact).abs() < 1e-10 * exact, "{mu}: {q} vs {exact}");
        }
    }

    #[test]
    fn frobenius_converges_second_order() {
        let exact = hilbert_schmidt_norm_sq(4.0);
        let e128 = build_matrix(4.0, 128)
            .unwrap()
            .entries
            .frobenius_norm()
            .powi(2)
            - exact;
        let e256 = build_matrix(4.0, 256)
            .unwrap()
            .entries
            .frobenius_norm()
            .powi(2)
            - exact;
        let ratio = e128 / e256;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }
}
