//! Analytic eigenvalues against the Nystrom/Jacobi oracle, with the
//! second-order convergence of the discretization made visible.

use cylcauchy::deviating::{lowest_modes, ScanOptions};
use cylcauchy::oracle::oracle_eigenvalues;

fn main() -> cylcauchy::Result<()> {
    for mu in [1.0, 9.0, 25.0] {
        let exact = lowest_modes(mu, 4, &ScanOptions::default())?;
        let coarse = oracle_eigenvalues(mu, 100, 4)?;
        let fine = oracle_eigenvalues(mu, 200, 4)?;
        println!("mu = {mu}");
        for (i, mode) in exact.iter().enumerate() {
            let e1 = coarse.pairs[i].lambda - mode.lambda;
            let e2 = fine.pairs[i].lambda - mode.lambda;
            println!(
                "  m = {}  lambda = {:>14.8}  err(n=100) = {:>10.2e}  err(n=200) = {:>10.2e}  ratio = {:.3}",
                mode.m,
                mode.lambda,
                e1,
                e2,
                e1 / e2
            );
        }
    }
    Ok(())
}
