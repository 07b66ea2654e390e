//! Monte Carlo histogram of the conditional empirical measure against the spectral density.

use std::f64::consts::{FRAC_PI_2, PI};

use qsdlab::bernstein::BernsteinFunction;
use qsdlab::conditional::{conditional_coeffs, density_on_grid};
use qsdlab::montecarlo::{mc_conditional_empirical, McSettings};
use qsdlab::semigroup::InitialDistribution;
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain, Potential};

fn main() -> qsdlab::Result<()> {
    let basis = eigensystem_closed_form(PI, 256, &build_grid(&Domain::interval(PI)?, 4097)?)?;
    let b = BernsteinFunction::stable_drift(0.1, 1.0, 0.5)?;
    let nu = InitialDistribution::dirac(&basis, &[FRAC_PI_2])?;
    let t = 2.0;
    let settings = McSettings { n_paths: 50_000, ..McSettings::default() };
    let mc = mc_conditional_empirical(&basis, &Potential::constant(), &b, &nu, t, &settings)?;
    let spectral = density_on_grid(&conditional_coeffs(&basis, &b, &nu, t, 128)?, &basis)?;
    println!("survival {:.5} +- {:.5} (spectral {:.5})", mc.survival, mc.survival_se, mc.expected_survival);
    println!("TV(histogram, spectral) = {:.4}", mc.histogram.tv_against(&spectral)?);
    Ok(())
}
