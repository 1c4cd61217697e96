//! Bracketing refinement shared by the eigenvalue searches.

/// Bisects a sign-change bracket down to adjacent floating-point numbers and
/// returns the endpoint with the smaller residual.
pub(crate) fn bisect<F, E>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    f_hi: f64,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    debug_assert!(lo < hi);
    debug_assert!(f_lo.signum() != f_hi.signum() || f_lo == 0.0 || f_hi == 0.0);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut f_hi = f_hi;
    // 2200 halvings cover the whole exponent range.
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Newton iteration safeguarded by a bracket `[lo, hi]` on which `f` changes
/// sign; falls back to bisection whenever a step leaves the bracket.
pub(crate) fn safeguarded_newton<F, E>(
    mut f_and_df: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    rel_tol: f64,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<(f64, f64), E>,
{
    let (f_lo, _) = f_and_df(lo)?;
    let lo_negative = f_lo < 0.0;
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..200 {
        let (fx, dfx) = f_and_df(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= rel_tol * x.abs() || hi - lo <= rel_tol * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
