//! Manufactured solution through the full pipeline: synthesize data on a
//! grid, project onto the reflected modes, solve, and compare.

use cylcauchy::deviating::ScanOptions;
use cylcauchy::operator::dirichlet_spectrum_1d;
use cylcauchy::solver::{
    project_f, residual, solve, synthesize_data, ModeBasis, ModeCoefficients, Provenance,
};

fn main() -> cylcauchy::Result<()> {
    let (k_max, m_max) = (4, 4);
    let basis = ModeBasis::new(
        &dirichlet_spectrum_1d(k_max)?,
        k_max,
        m_max,
        &ScanOptions::default(),
    )?;

    let mut exact = ModeCoefficients::zeros(k_max, m_max, Provenance::Synthetic);
    exact.set(1, 1, 1.0);
    exact.set(1, 2, 0.5);
    exact.set(2, 1, 0.25);

    let data = synthesize_data(&exact, &basis, 256, 256)?;
    let f = project_f(&data, &basis)?;
    let u = solve(&f, &basis, false)?;

    println!(
        "{:>2} {:>2} {:>22} {:>22} {:>10}",
        "k", "m", "f~", "a", "error"
    );
    for (k, m, a) in u.coefficients.iter() {
        let err = a - exact.get(k, m);
        if a.abs() > 1e-9 || err.abs() > 1e-9 {
            println!(
                "{k:>2} {m:>2} {:>22.15e} {a:>22.15e} {err:>10.1e}",
                f.get(k, m)
            );
        }
    }
    println!(
        "||u||^2 = {:.15} (m = 1: {:.15})",
        u.norm_sq, u.norm_sq_principal
    );
    println!("coefficient residual = {:.1e}", residual(&u, &f, &basis)?);
    println!(
        "u(pi/2, 1) = {:.12}",
        u.evaluate(&basis, std::f64::consts::FRAC_PI_2, 1.0)?
    );
    Ok(())
}
