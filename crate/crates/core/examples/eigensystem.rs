//! Dirichlet eigensystems: closed form, finite differences and a tensor product.

use std::f64::consts::PI;

use qsdlab::spectral::{build_grid, eigensystem_closed_form, eigensystem_fd, tensor_basis, Domain, Potential};

fn main() -> qsdlab::Result<()> {
    let grid = build_grid(&Domain::interval(PI)?, 2049)?;
    let exact = eigensystem_closed_form(PI, 8, &grid)?;
    let fd = eigensystem_fd(&Potential::linear(1.0), &grid, 8)?;
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "closed", "fd U=x", "mu(phi_k)");
    for k in 0..8 {
        println!("{k:>3} {:>12.6} {:>12.6} {:>12.6}", exact.lambdas()[k], fd.lambdas()[k], exact.mu_coeffs()[k]);
    }
    println!("orthonormality residual: closed {:e}, fd {:e}", exact.orthonormality_residual(), fd.orthonormality_residual());

    let f = eigensystem_closed_form(PI, 16, &build_grid(&Domain::interval(PI)?, 129)?)?;
    let square = tensor_basis(&[f.clone(), f], 10)?;
    println!("square [0,pi]^2, lowest eigenvalues: {:?}", square.lambdas());
    Ok(())
}
