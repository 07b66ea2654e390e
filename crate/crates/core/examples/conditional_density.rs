//! Density of the conditional empirical measure against the quasi-ergodic law.

use std::f64::consts::PI;

use qsdlab::bernstein::BernsteinFunction;
use qsdlab::conditional::{conditional_coeffs, density_on_grid, ground_state_measure, tv_distance};
use qsdlab::semigroup::InitialDistribution;
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain};

fn main() -> qsdlab::Result<()> {
    let basis = eigensystem_closed_form(PI, 256, &build_grid(&Domain::interval(PI)?, 4097)?)?;
    let b = BernsteinFunction::stable(0.5)?;
    let nu = InitialDistribution::reference(&basis)?;
    let mu0 = ground_state_measure(&basis)?;
    for t in [1.0, 5.0, 20.0] {
        let c = conditional_coeffs(&basis, &b, &nu, t, 128)?;
        let m = density_on_grid(&c, &basis)?;
        let d = m.density();
        let step = d.len() / 8;
        let samples: Vec<String> = (0..=8).map(|i| format!("{:.4}", d[(i * step).min(d.len() - 1)])).collect();
        println!("t = {t:>4}: mean {:+.1e}, TV {:.4e}, density/mu0 at x = k*pi/8: {}", c.mean(&basis), tv_distance(&m, &mu0)?, samples.join(" "));
    }
    Ok(())
}
