//! Lowest eigenpairs of the reflected-argument problem
//! `v'' - mu v = lambda v(1 - t)`, `v(0) = v'(0) = 0`.
//!
//! ```text
//! cargo run --example spectrum -- 25
//! ```

use cylcauchy::deviating::{lowest_modes, ScanOptions};

fn main() -> cylcauchy::Result<()> {
    let mu: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(25.0), |s| s.parse())
        .unwrap_or(25.0);
    let modes = lowest_modes(mu, 6, &ScanOptions::default())?;

    println!("mu = {mu}");
    println!("{:>3} {:>24} {:>10}", "m", "lambda", "|Phi|");
    for mode in &modes {
        println!(
            "{:>3} {:>24.16e} {:>10.1e}",
            mode.m,
            mode.lambda,
            mode.residual()
        );
    }

    // eigenvalues alternate in sign; only the first is small
    println!("\nfirst three eigenfunctions on [0, 1]:");
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let values: Vec<String> = modes
            .iter()
            .take(3)
            .map(|m| format!("{:>10.5}", m.eval(t)))
            .collect();
        println!("t = {t:.1} {}", values.join(" "));
    }
    Ok(())
}
