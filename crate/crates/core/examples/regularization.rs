//! Regularized measure: the `t^{-beta}` tilde correction and its effect on `t^2 W_2^2`.

use std::f64::consts::PI;

use qsdlab::bernstein::BernsteinFunction;
use qsdlab::conditional::{beta_limit, conditional_coeffs, density_on_grid, ground_state_measure, regularize, tilde_density_on_grid};
use qsdlab::semigroup::InitialDistribution;
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain};
use qsdlab::transport::w2_quantile_1d;

fn main() -> qsdlab::Result<()> {
    let basis = eigensystem_closed_form(PI, 256, &build_grid(&Domain::interval(PI)?, 4097)?)?;
    let b = BernsteinFunction::stable(0.5)?;
    let nu = InitialDistribution::ground_state(&basis)?;
    let mu0 = ground_state_measure(&basis)?;
    let beta = 0.5;
    println!("beta = {beta}, admissible below {}", beta_limit(1, 0.5));
    for t in [5.0, 10.0, 20.0, 40.0] {
        let c = conditional_coeffs(&basis, &b, &nu, t, 128)?;
        let w = w2_quantile_1d(&density_on_grid(&c, &basis)?, &mu0)?;
        let r = regularize(&basis, &c, beta, 0.5)?;
        let wt = w2_quantile_1d(&tilde_density_on_grid(&r, &basis)?, &mu0)?;
        println!("t = {t:>4}: t2w2 = {:.6e}, regularized {:.6e}", t * t * w * w, t * t * wt * wt);
    }
    Ok(())
}
