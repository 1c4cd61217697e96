//! Working from a spectrum alone: a 2-D tensor Dirichlet spectrum has no
//! evaluable basis here, so data enter as coefficients.

use cylcauchy::deviating::ScanOptions;
use cylcauchy::operator::tensor_spectrum;
use cylcauchy::solver::{criterion, parse_coefficients, solve, ModeBasis};
use std::path::Path;

fn main() -> cylcauchy::Result<()> {
    let spectrum = tensor_spectrum(2, 6, 12)?;
    for e in spectrum.entries() {
        println!("k = {:>2}  mu = {:>4}  label = {:?}", e.k, e.mu, e.label);
    }
    let basis = ModeBasis::new(&spectrum, 12, 2, &ScanOptions::default())?;

    let text: String = (1..=12)
        .map(|k| format!("{k},1,{:e}\n{k},2,0.01\n", 1e-3 / k as f64))
        .collect();
    let f = parse_coefficients(&text, Path::new("<inline>"), 12, 2)?;
    let report = criterion(&f, &basis.lambda1s())?;
    println!(
        "verdict = {:?}, S_12 = {:.6e}",
        report.verdict, report.partial_sums[11]
    );
    let u = solve(&f, &basis, true)?;
    println!("||u|| = {:.6e}; evaluable = {}", u.norm(), u.evaluable);
    Ok(())
}
