//! Data `f~_k1 = epsilon` on a single direction produce a solution of norm
//! `epsilon / lambda_k1`: the amplification grows like `e^k / (4 k^2)`.

use cylcauchy::operator::dirichlet_spectrum_1d;
use cylcauchy::solver::hadamard_amplification;

fn main() -> cylcauchy::Result<()> {
    let epsilon = 1e-3;
    let ks: Vec<usize> = (2..=12).chain([20, 40, 80, 700]).collect();
    let table = hadamard_amplification(&dirichlet_spectrum_1d(700)?, &ks, epsilon, 1e-12)?;
    println!("epsilon = {epsilon}");
    println!(
        "{:>4} {:>8} {:>24} {:>24}",
        "k", "mu", "1/lambda_k1", "||u||"
    );
    for row in &table {
        match (row.amplification, row.solution_norm) {
            (Some(a), Some(n)) => println!("{:>4} {:>8} {a:>24.16e} {n:>24.16e}", row.k, row.mu),
            _ => println!(
                "{:>4} {:>8} {:>24} {:>24}",
                row.k, row.mu, "unrepresentable", "-"
            ),
        }
    }
    Ok(())
}
