//! `lambda_k1` for `mu = k^2` against `4 mu e^{-sqrt(mu)}` and the refined
//! `2 mu ln coth(sqrt(mu)/2)`.

use cylcauchy::deviating::{asymptotic_lambda1, smallest_eigenvalue};

fn main() -> cylcauchy::Result<()> {
    println!(
        "{:>3} {:>24} {:>14} {:>14}",
        "k", "lambda_k1", "lambda/lead-1", "lambda/ref-1"
    );
    for k in [2usize, 3, 5, 8, 10, 15, 20, 40, 100, 300] {
        let mu = (k * k) as f64;
        let lambda = smallest_eigenvalue(mu, 1e-12)?.lambda;
        let a = asymptotic_lambda1(mu)?;
        println!(
            "{k:>3} {lambda:>24.16e} {:>14.3e} {:>14.3e}",
            lambda / a.leading - 1.0,
            lambda / a.refined - 1.0
        );
    }
    Ok(())
}
