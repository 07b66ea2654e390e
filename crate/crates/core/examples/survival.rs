//! Survival of the subordinated killed process from several initial laws.

use std::f64::consts::{FRAC_PI_2, PI};

use qsdlab::bernstein::BernsteinFunction;
use qsdlab::semigroup::{default_t0, survival_limit, survival_probability, survival_scaled, t0_probe, InitialDistribution};
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain};

fn main() -> qsdlab::Result<()> {
    let basis = eigensystem_closed_form(PI, 256, &build_grid(&Domain::interval(PI)?, 4097)?)?;
    let b = BernsteinFunction::stable(0.5)?;
    for nu in [
        InitialDistribution::ground_state(&basis)?,
        InitialDistribution::reference(&basis)?,
        InitialDistribution::dirac(&basis, &[FRAC_PI_2])?,
    ] {
        println!("{}: Q(inf) = {:.6}, t0 = {:?}", nu.describe(), survival_limit(&basis, &nu), default_t0(&basis, &b, &nu, &t0_probe()));
        for t in [0.5, 2.0, 8.0] {
            println!(
                "  t = {t:>4}: P(tau > t) = {:.6e}, scaled Q = {:.6}",
                survival_probability(&basis, &b, &nu, t),
                survival_scaled(&basis, &b, &nu, t)?
            );
        }
    }
    Ok(())
}
