//! Removing the directions `u_k1, k > p` leaves data on which the problem is
//! stable: `||u|| <= C(p) ||f||` with `C(p) = max(4, max_{k<=p} 1/lambda_k1)`.
//! The full data set, by contrast, is amplified without bound as `K` grows.

use cylcauchy::deviating::ScanOptions;
use cylcauchy::operator::dirichlet_spectrum_1d;
use cylcauchy::solver::{
    solve, split_subspace, stability_constant, ModeBasis, ModeCoefficients, Provenance,
};

fn main() -> cylcauchy::Result<()> {
    let (k_max, m_max, p) = (10, 4, 3);
    let basis = ModeBasis::new(
        &dirichlet_spectrum_1d(k_max)?,
        k_max,
        m_max,
        &ScanOptions::default(),
    )?;
    let c = stability_constant(&basis, p);

    // deterministic pseudo-random data
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    println!("C({p}) = {c:.6}");
    println!(
        "{:>5} {:>14} {:>14}",
        "trial", "hat ||u||/||f||", "full ||u||/||f||"
    );
    for trial in 0..8 {
        let f = ModeCoefficients::from_fn(k_max, m_max, Provenance::Synthetic, |_, _| next());
        let split = split_subspace(&f, p)?;
        let stable = solve(&split.hat_part, &basis, false)?;
        let full = solve(&f, &basis, true)?;
        println!(
            "{trial:>5} {:>14.6} {:>14.3e}",
            stable.norm() / split.hat_part.norm(),
            full.norm() / f.norm()
        );
    }
    Ok(())
}
