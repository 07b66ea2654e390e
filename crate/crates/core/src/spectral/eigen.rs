use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

use super::basis::{BasisKind, SpectralBasis};
use super::tridiag::lowest_eigenpairs;
use super::{Domain, Grid, Potential};

/// Smallest grid accepted by the eigensystem builders.
pub const MIN_EIGEN_NODES: usize = 16;

fn interval_grid(grid: &Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Unsupported("eigensystem requires a 1-D grid; use tensor_basis for boxes".into()));
    }
    if grid.len() < MIN_EIGEN_NODES {
        return Err(Error::Config(format!(
            "eigensystem needs at least {MIN_EIGEN_NODES} nodes, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Exact Dirichlet eigensystem of `d²/dx²` on `[0, L]` with `μ = dx/L`:
/// `λ_k = ((k+1)π/L)²`, `φ_k = √2 sin((k+1)πx/L)`.
pub fn eigensystem_closed_form(length: f64, k: usize, grid: &Grid) -> Result<SpectralBasis> {
    interval_grid(grid)?;
    if k == 0 {
        return Err(Error::Config("need at least one mode".into()));
    }
    let domain = Domain::interval(length)?;
    let x = grid.nodes();
    let n = x.len();
    if (x[n - 1] - length).abs() > 1e-12 * length {
        return Err(Error::Config("grid does not span the interval".into()));
    }
    let lambdas = (0..k).map(|m| ((m + 1) as f64 * PI / length).powi(2)).collect();
    let mut values = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    let base: Vec<f64> = x.iter().map(|xi| (PI * xi / length).sin()).collect();
    for m in 0..k {
        let freq = (m + 1) as f64 * PI / length;
        let mut phi: Vec<f64> = x.iter().map(|xi| SQRT_2 * (freq * xi).sin()).collect();
        phi[0] = 0.0;
        phi[n - 1] = 0.0;
        let mut ratio: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.0 } else { (freq * x[i]).sin() / base[i] })
            .collect();
        // Ratio of boundary slopes.
        ratio[0] = (m + 1) as f64;
        ratio[n - 1] = if m % 2 == 0 { 1.0 } else { -1.0 } * (m + 1) as f64;
        values.push(phi);
        ratios.push(ratio);
    }
    let u = vec![-length.ln(); n];
    Ok(SpectralBasis::assemble(
        domain,
        grid.clone(),
        BasisKind::ClosedForm,
        Potential::constant().label(),
        u,
        lambdas,
        values,
        ratios,
    ))
}

/// Finite-difference Dirichlet eigensystem of `Lf = e^{-U}(e^U f')'` on an interval.
///
/// The potential is normalized against the grid before discretization.
pub fn eigensystem_fd(potential: &Potential, grid: &Grid, k: usize) -> Result<SpectralBasis> {
    interval_grid(grid)?;
    let x = grid.nodes();
    let n = x.len();
    if k == 0 {
        return Err(Error::Config("need at least one mode".into()));
    }
    if k > n / 4 {
        return Err(Error::Resolution { requested: k, allowed: n / 4 });
    }
    let length = x[n - 1];
    let domain = Domain::interval(length)?;
    let potential = potential.clone().normalized(x, &grid.axis(0).weights);
    let h = grid.axis(0).spacing();
    let u: Vec<f64> = x.iter().map(|xi| potential.value(*xi)).collect();
    // Conductances e^U at cell midpoints.
    let a: Vec<f64> = (0..n - 1).map(|i| potential.value(0.5 * (x[i] + x[i + 1])).exp()).collect();

    let m = n - 2;
    let h2 = h * h;
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for j in 0..m {
        let i = j + 1;
        diag.push((a[i - 1] + a[i]) / (h2 * u[i].exp()));
        if j + 1 < m {
            off.push(-a[i] / (h2 * (0.5 * (u[i] + u[i + 1])).exp()));
        }
    }
    let (lambdas, vecs) = lowest_eigenpairs(&diag, &off, k);

    let mid = n / 2;
    let mut values = Vec::with_capacity(k);
    for (idx, y) in vecs.iter().enumerate() {
        let mut phi = vec![0.0; n];
        for j in 0..m {
            phi[j + 1] = y[j] * (-0.5 * u[j + 1]).exp();
        }
        // Discrete L²(μ) normalization with trapezoid weights (boundary values vanish).
        let norm: f64 = (1..n - 1).map(|i| phi[i] * phi[i] * u[i].exp() * h).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|p| *p /= norm);
        let flip = if idx == 0 { phi[mid] < 0.0 } else { first_nonzero(&phi) < 0.0 };
        if flip {
            phi.iter_mut().for_each(|p| *p = -*p);
        }
        values.push(phi);
    }
    let ratios = values.iter().map(|phi| extrapolated_ratio(phi, &values[0])).collect();
    Ok(SpectralBasis::assemble(
        domain,
        grid.clone(),
        BasisKind::FiniteDifference,
        potential.label(),
        u,
        lambdas,
        values,
        ratios,
    ))
}

fn first_nonzero(phi: &[f64]) -> f64 {
    let scale = phi.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    phi.iter().copied().find(|p| p.abs() > 1e-12 * scale).unwrap_or(1.0)
}

/// `φ/φ_0` at interior nodes; boundary nodes by one-sided quadratic extrapolation.
pub(crate) fn extrapolated_ratio(phi: &[f64], ground: &[f64]) -> Vec<f64> {
    let n = phi.len();
    let mut r: Vec<f64> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.0 } else { phi[i] / ground[i] })
        .collect();
    r[0] = 3.0 * r[1] - 3.0 * r[2] + r[3];
    r[n - 1] = 3.0 * r[n - 2] - 3.0 * r[n - 3] + r[n - 4];
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_grid;

    fn pi_grid(n: usize) -> Grid {
        build_grid(&Domain::interval(PI).unwrap(), n).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let b = eigensystem_closed_form(PI, 3, &pi_grid(201)).unwrap();
        assert_eq!(b.lambdas(), &[1.0, 4.0, 9.0]);
        assert!((b.phi(0)[100] - SQRT_2).abs() < 1e-14);
        assert!(b.orthonormality_residual() < 1e-8);
        assert_eq!(b.boundary_max(), 0.0);
        let m01: f64 = b.phi(0).iter().zip(b.phi(1)).zip(b.mu_weights()).map(|((a, c), w)| a * c * w).sum();
        assert!(m01.abs() < 1e-14);
    }

    #[test]
    fn closed_form_mu_coefficients() {
        let b = eigensystem_closed_form(PI, 4, &pi_grid(4001)).unwrap();
        let mu = b.mu_coeffs();
        assert!((mu[0] - 2.0 * SQRT_2 / PI).abs() < 1e-15);
        assert!(mu[1].abs() < 1e-15);
        assert!((mu[2] - 2.0 * SQRT_2 / (3.0 * PI)).abs() < 1e-15);
        let quad: f64 = b.phi(2).iter().zip(b.mu_weights()).map(|(p, w)| p * w).sum();
        assert!((quad - mu[2]).abs() < 1e-6);
    }

    #[test]
    fn fd_matches_closed_form() {
        let g = pi_grid(2000);
        let fd = eigensystem_fd(&Potential::constant(), &g, 5).unwrap();
        assert!((fd.lambdas()[0] - 1.0).abs() < 1e-5);
        let err = fd
            .phi(2)
            .iter()
            .zip(g.nodes())
            .map(|(p, x)| (p - SQRT_2 * (3.0 * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err}");
        assert!(fd.orthonormality_residual() < 1e-5);
        assert_eq!(fd.boundary_max(), 0.0);
    }

    #[test]
    fn fd_second_order_convergence() {
        let errs: Vec<f64> = [250, 500, 1000, 2000]
            .iter()
            .map(|n| {
                let fd = eigensystem_fd(&Potential::constant(), &pi_grid(*n), 4).unwrap();
                (fd.lambdas()[3] - 16.0).abs() / 16.0
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9 && order < 2.1, "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn fd_linear_potential() {
        let g = build_grid(&Domain::interval(1.0).unwrap(), 801).unwrap();
        let b = eigensystem_fd(&Potential::linear(1.0), &g, 8).unwrap();
        assert!(b.lambdas()[0] > 0.0);
        assert!(b.lambdas().windows(2).all(|w| w[1] > w[0]));
        let z: f64 = b.u_values().iter().zip(&g.axis(0).weights).map(|(u, w)| u.exp() * w).sum();
        assert!((z - 1.0).abs() < 1e-10);
        assert!(b.orthonormality_residual() < 1e-8);
        assert!(b.phi(0)[1..800].iter().all(|p| *p > 0.0));
        // λ_0 for -(e^x f')' e^{-x}: 1/4 + π².
        assert!((b.lambdas()[0] - (0.25 + PI * PI)).abs() < 1e-4);
    }

    #[test]
    fn fd_rejects_bad_requests() {
        let g = pi_grid(64);
        assert!(matches!(
            eigensystem_fd(&Potential::constant(), &g, 17),
            Err(Error::Resolution { .. })
        ));
        let sq = build_grid(&Domain::cube(vec![1.0, 1.0]).unwrap(), 32).unwrap();
        assert!(matches!(
            eigensystem_fd(&Potential::constant(), &sq, 2),
            Err(Error::Unsupported(_))
        ));
    }
}
