mod common;

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::fs;

use common::{pi_basis, sqrt_b};
use proptest::prelude::*;
use qsdlab::conditional::conditional_coeffs;
use qsdlab::limits::limit_precise;
use qsdlab::semigroup::{survival_scaled, InitialDistribution};
use qsdlab::spectral::{
    build_grid, eigensystem_closed_form, eigensystem_fd, read_basis, tensor_basis, write_basis, Domain, Potential,
    SpectralBasis,
};

fn bessel_sum(b: &SpectralBasis) -> f64 {
    b.mu_coeffs()[1..].iter().map(|c| c * c).sum()
}

fn interior_positive(b: &SpectralBasis) -> bool {
    let g = b.grid();
    (0..g.len()).filter(|i| !g.is_boundary(*i)).all(|i| b.phi(0)[i] > 0.0)
}

#[test]
fn closed_form_examples() {
    let b = pi_basis(201, 3);
    assert_eq!(b.lambdas(), &[1.0, 4.0, 9.0]);
    assert!((b.phi(0)[100] - SQRT_2).abs() < 1e-14);
    for len in [0.5, 1.0, 7.0] {
        let g = build_grid(&Domain::interval(len).unwrap(), 301).unwrap();
        let b = eigensystem_closed_form(len, 2, &g).unwrap();
        let overlap = b.integrate_mu(&b.phi(0).iter().zip(b.phi(1)).map(|(a, c)| a * c).collect::<Vec<_>>());
        assert!(overlap.abs() < 1e-14);
    }
}

#[test]
fn fd_constant_field_matches_closed_form() {
    let g = build_grid(&Domain::interval(PI).unwrap(), 2000).unwrap();
    let u = Potential::from_fn("-log pi", |_| -PI.ln());
    let fd = eigensystem_fd(&u, &g, 5).unwrap();
    assert!((fd.lambdas()[0] - 1.0).abs() < 1e-5);
    let z: f64 = fd.u_values().iter().zip(&g.weights()).map(|(u, w)| u.exp() * w).sum();
    assert!((z - 1.0).abs() < 1e-12);
    let sign = fd.phi(2)[1].signum();
    let err = fd
        .phi(2)
        .iter()
        .zip(g.nodes())
        .map(|(p, x)| (sign * p - SQRT_2 * (3.0 * x).sin()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn shifted_linear_potential_spectrum() {
    let g = build_grid(&Domain::interval(1.0).unwrap(), 1001).unwrap();
    let b = eigensystem_fd(&Potential::linear(1.0), &g, 12).unwrap();
    assert!(b.lambdas()[0] > 0.0);
    assert!(b.lambdas().windows(2).all(|w| w[1] > w[0]));
    assert!(b.orthonormality_residual() < 1e-8);
    assert_eq!(b.boundary_max(), 0.0);
    assert!(interior_positive(&b));
}

#[test]
fn bessel_inequality_on_every_basis_kind() {
    let cf = pi_basis(4097, 256);
    let g = build_grid(&Domain::interval(1.0).unwrap(), 2001).unwrap();
    let fd = eigensystem_fd(&Potential::linear(2.0), &g, 64).unwrap();
    let f = pi_basis(65, 12);
    let tb = tensor_basis(&[f.clone(), f], 40).unwrap();
    for b in [&cf, &fd, &tb] {
        let s = bessel_sum(b);
        let total = s + b.mu_coeffs()[0].powi(2);
        assert!(s <= 1.0 && total <= 1.0 + 1e-9, "{s} {total}");
    }
    // Closed form: Σ_{k odd ≤ K} 8/(k²π²) from below.
    let exact: f64 = (0..256).step_by(2).map(|m| 8.0 / (((m + 1) as f64) * PI).powi(2)).sum();
    assert!((bessel_sum(&cf) + cf.mu_coeffs()[0].powi(2) - exact).abs() < 1e-14);
}

#[test]
fn weyl_sandwich_holds() {
    for b in [pi_basis(1025, 128), {
        let f = pi_basis(41, 10);
        tensor_basis(&[f.clone(), f], 60).unwrap()
    }] {
        let a0 = b.weyl_constant();
        assert!(a0 >= 1.0 && a0.is_finite());
        let e = 2.0 / b.dim() as f64;
        let l0 = b.lambdas()[0];
        for (k, l) in b.lambdas().iter().enumerate().skip(1) {
            let kk = (k as f64).powf(e);
            assert!(kk / a0 <= (l - l0) * (1.0 + 1e-12) && l - l0 <= a0 * kk * (1.0 + 1e-12));
        }
    }
}

#[test]
fn tensor_examples() {
    let f = pi_basis(64, 4);
    let b = tensor_basis(&[f.clone(), f], 4).unwrap();
    assert_eq!(b.lambdas(), &[2.0, 5.0, 5.0, 8.0]);
    assert_eq!(b.grid().len(), 64 * 64);
    assert!(interior_positive(&b));
    assert!(b.orthonormality_residual() < 1e-8);
}

fn rotate_pair(text: &str, a: usize, b: usize, angle: f64) -> String {
    let (c, s) = (angle.cos(), angle.sin());
    let mut out = String::new();
    let mut offset = None;
    for line in text.lines() {
        if line.starts_with("#values") {
            offset = Some(2);
        } else if line.starts_with("#ratios") {
            offset = Some(1);
        } else if line.starts_with('#') {
            offset = None;
        } else if let Some(o) = offset {
            let mut tok: Vec<String> = line.split(' ').map(String::from).collect();
            let x: f64 = tok[o + a].parse().unwrap();
            let y: f64 = tok[o + b].parse().unwrap();
            tok[o + a] = format!("{:.16e}", c * x + s * y);
            tok[o + b] = format!("{:.16e}", -s * x + c * y);
            let _ = writeln!(out, "{}", tok.join(" "));
            continue;
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

#[test]
fn degenerate_pair_rotation_leaves_series_invariant() {
    let f = pi_basis(65, 8);
    let b = tensor_basis(&[f.clone(), f], 20).unwrap();
    assert_eq!(b.lambdas()[1], b.lambdas()[2]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tensor.txt");
    write_basis(&b, &p).unwrap();
    let rotated = rotate_pair(&fs::read_to_string(&p).unwrap(), 1, 2, 0.7);
    let q = dir.path().join("rotated.txt");
    fs::write(&q, rotated).unwrap();
    let r = read_basis(&q).unwrap();
    assert!((r.phi(1)[700] - b.phi(1)[700]).abs() > 1e-3);
    assert!(r.orthonormality_residual() < 1e-8);

    let bf = sqrt_b();
    for (nu_b, nu_r) in [
        (InitialDistribution::dirac(&b, &[1.0, 2.2]).unwrap(), InitialDistribution::dirac(&r, &[1.0, 2.2]).unwrap()),
        (InitialDistribution::reference(&b).unwrap(), InitialDistribution::reference(&r).unwrap()),
    ] {
        assert!((nu_b.coeffs()[1] - nu_r.coeffs()[1]).abs() > 1e-6 || nu_b.coeffs()[1].abs() < 1e-12);
        let qb = survival_scaled(&b, &bf, &nu_b, 0.3).unwrap();
        let qr = survival_scaled(&r, &bf, &nu_r, 0.3).unwrap();
        assert!((qb - qr).abs() <= 1e-12 * qb.abs(), "{qb} {qr}");
        let lb = limit_precise(&b, &bf, &nu_b, 20).unwrap().value();
        let lr = limit_precise(&r, &bf, &nu_r, 20).unwrap().value();
        assert!((lb - lr).abs() <= 1e-10 * lb, "{lb} {lr}");
        let cb = conditional_coeffs(&b, &bf, &nu_b, 3.0, 20).unwrap().rho(&b);
        let cr = conditional_coeffs(&r, &bf, &nu_r, 3.0, 20).unwrap().rho(&r);
        let err = cb.iter().zip(&cr).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn basis_file_round_trip() {
    let g = build_grid(&Domain::interval(2.0).unwrap(), 257).unwrap();
    let b = eigensystem_fd(&Potential::linear(-0.4), &g, 16).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fd.txt");
    write_basis(&b, &p).unwrap();
    let back = read_basis(&p).unwrap();
    assert_eq!(back.lambdas(), b.lambdas());
    for m in 0..16 {
        assert_eq!(back.phi(m), b.phi(m));
        assert_eq!(back.ratio(m), b.ratio(m));
    }
    assert_eq!(back.mu_coeffs(), b.mu_coeffs());
    let cf = pi_basis(129, 8);
    write_basis(&cf, &p).unwrap();
    assert_eq!(read_basis(&p).unwrap().mu_coeffs(), cf.mu_coeffs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_form_invariants(len in 0.2f64..20.0, k in 1usize..64) {
        let g = build_grid(&Domain::interval(len).unwrap(), 4 * k + 257).unwrap();
        let b = eigensystem_closed_form(len, k, &g).unwrap();
        prop_assert!(b.orthonormality_residual() < 1e-8);
        prop_assert_eq!(b.boundary_max(), 0.0);
        prop_assert!(b.lambdas()[0] > 0.0);
        prop_assert!(b.lambdas().windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(interior_positive(&b));
        prop_assert!(bessel_sum(&b) <= 1.0);
    }

    #[test]
    fn fd_invariants(slope in -3.0f64..3.0, len in 0.5f64..4.0, n in 2000usize..2400) {
        let g = build_grid(&Domain::interval(len).unwrap(), n).unwrap();
        let b = eigensystem_fd(&Potential::linear(slope), &g, 10).unwrap();
        prop_assert!(b.orthonormality_residual() < 1e-5);
        prop_assert_eq!(b.boundary_max(), 0.0);
        prop_assert!(b.lambdas()[0] > 0.0);
        prop_assert!(b.lambdas().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(interior_positive(&b));
        prop_assert!(bessel_sum(&b) <= 1.0);
    }
}
