//! The truncated solvability test on three data families at `K = 40`.

use cylcauchy::deviating::ScanOptions;
use cylcauchy::operator::dirichlet_spectrum_1d;
use cylcauchy::solver::{criterion, ModeBasis, ModeCoefficients, Provenance};

fn main() -> cylcauchy::Result<()> {
    let k_max = 40;
    let basis = ModeBasis::new(
        &dirichlet_spectrum_1d(k_max)?,
        k_max,
        1,
        &ScanOptions::default(),
    )?;
    let lambda1 = basis.lambda1s();

    let families: [(&str, Box<dyn Fn(usize) -> f64>); 3] = [
        (
            "f_k1 = lambda_k1 / k",
            Box::new(|k| lambda1[k - 1] / k as f64),
        ),
        ("f_k1 = lambda_k1", Box::new(|k| lambda1[k - 1])),
        ("f_k1 = exp(-k)", Box::new(|k| (-(k as f64)).exp())),
    ];
    for (name, f) in &families {
        let coeffs = ModeCoefficients::from_fn(k_max, 1, Provenance::Synthetic, |k, _| f(k));
        let report = criterion(&coeffs, &lambda1)?;
        println!(
            "{name:<22} S_10 = {:>10.4e}  S_40 = {:>10.4e}  verdict = {:?}  tail ratio = {:?}  power = {:?}",
            report.partial_sums[9], report.partial_sums[39], report.verdict, report.tail_ratio, report.power_exponent
        );
    }
    // exponentially small data can still be admissible: lambda_k1 is
    // itself exponentially small
    Ok(())
}
