mod common;

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use common::{graded_integral, pi_basis, sqrt_b};
use proptest::prelude::*;
use qsdlab::bernstein::BernsteinFunction;
use qsdlab::montecarlo::{sample_subordinator_increment, RngStream};
use qsdlab::semigroup::*;
use qsdlab::spectral::{build_grid, eigensystem_fd, Domain, Potential, SpectralBasis};
use qsdlab::stats::{linear_fit, mean_and_se};

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn interior_sup_diff(basis: &SpectralBasis, a: &[f64], b: &[f64]) -> f64 {
    (0..a.len())
        .filter(|i| !basis.grid().is_boundary(*i))
        .map(|i| (a[i] - b[i]).abs())
        .fold(0.0, f64::max)
}

fn linear_fd_basis() -> SpectralBasis {
    let g = build_grid(&Domain::interval(1.0).unwrap(), 2001).unwrap();
    eigensystem_fd(&Potential::linear(1.0), &g, 24).unwrap()
}

fn inner_mu(b: &SpectralBasis, f: &[f64], g: &[f64]) -> f64 {
    b.integrate_mu(&f.iter().zip(g).map(|(x, y)| x * y).collect::<Vec<_>>())
}

#[test]
fn eigenfunctions_are_eigenvectors() {
    let b = pi_basis(1025, 32);
    for k in [0, 1, 5, 31] {
        for t in [0.01, 0.3, 2.0] {
            let p = apply_pd(&b, t, b.phi(k)).unwrap();
            let want: Vec<f64> = b.phi(k).iter().map(|v| (-b.lambdas()[k] * t).exp() * v).collect();
            assert!(sup_diff(&p, &want) < 1e-12);
        }
    }
    assert!(apply_pd(&b, 0.0, b.phi(0)).is_err());
    assert!(apply_pd(&b, -1.0, b.phi(0)).is_err());
}

#[test]
fn dirichlet_semigroup_on_constant() {
    let b = pi_basis(4097, 200);
    let one = vec![1.0; 4097];
    let p = apply_pd(&b, 1.0, &one).unwrap();
    // Independent series: μ(φ_m) φ_m(π/2) = (4/((m+1)π)) sin((m+1)π/2) for even m.
    let series: f64 = (0..200)
        .step_by(2)
        .map(|m| {
            let k = (m + 1) as f64;
            (-k * k).exp() * 4.0 / (k * PI) * (k * FRAC_PI_2).sin()
        })
        .sum();
    assert!((p[2048] - series).abs() < 1e-6 * series);
    let lead = 4.0 / PI * (-1f64).exp();
    assert!((series - lead).abs() <= (-9f64).exp() * 4.0 / (3.0 * PI) * 1.001);
    assert!((lead - 0.46839).abs() < 1e-5);
}

#[test]
fn sub_markov() {
    let b = pi_basis(2049, 256);
    let one = vec![1.0; 2049];
    for t in [0.05, 0.1, 1.0, 5.0] {
        let p = apply_pd(&b, t, &one).unwrap();
        assert!(p.iter().all(|v| *v <= 1.0 + 1e-10), "t = {t}");
    }
}

#[test]
fn subordinated_semigroup_examples() {
    let b = pi_basis(1025, 64);
    let f: Vec<f64> = b.grid().nodes().iter().map(|x| x * (PI - x) * (1.0 + x.cos())).collect();
    let lin = BernsteinFunction::linear(1.0).unwrap();
    for t in [0.1, 1.0] {
        let pd = apply_pd(&b, t, &f).unwrap();
        let pdb = apply_pdb(&b, &lin, t, &f).unwrap();
        assert!(sup_diff(&pd, &pdb) <= 1e-14);
    }
    let p = apply_pdb(&b, &sqrt_b(), 1.0, b.phi(1)).unwrap();
    let want: Vec<f64> = b.phi(1).iter().map(|v| (-2f64).exp() * v).collect();
    assert!(sup_diff(&p, &want) < 1e-12);

    let errs: Vec<f64> = [1.0, 0.1, 0.01]
        .iter()
        .map(|t| sup_diff(&apply_pdb(&b, &sqrt_b(), *t, b.phi(0)).unwrap(), b.phi(0)))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn ground_state_semigroup() {
    for b in [pi_basis(1025, 64), linear_fd_basis()] {
        let n = b.grid().len();
        let p = apply_p0(&b, 0.7, &vec![1.0; n]).unwrap();
        assert!(interior_sup_diff(&b, &p, &vec![1.0; n]) < 1e-8);
        let gap = b.lambdas()[1] - b.lambdas()[0];
        let t = 0.4;
        let p = apply_p0(&b, t, b.ratio(1)).unwrap();
        let want: Vec<f64> = b.ratio(1).iter().map(|v| (-gap * t).exp() * v).collect();
        assert!(interior_sup_diff(&b, &p, &want) < 1e-8 * (1.0 + b.ratio_sup_norms()[1]));
    }
}

#[test]
fn semigroup_laws_and_symmetry() {
    let bf = sqrt_b();
    for b in [pi_basis(1025, 64), linear_fd_basis()] {
        let x = b.grid().nodes().to_vec();
        let len = *x.last().unwrap();
        let f: Vec<f64> = x.iter().map(|v| (v / len * 7.0).sin() + (v / len).powi(2)).collect();
        let g: Vec<f64> = x.iter().map(|v| (3.0 * v / len).cos() * v).collect();
        let (s, t) = (0.013, 0.021);
        let lhs = apply_pd(&b, t, &apply_pd(&b, s, &f).unwrap()).unwrap();
        assert!(sup_diff(&lhs, &apply_pd(&b, s + t, &f).unwrap()) < 1e-10);
        let lhs = apply_pdb(&b, &bf, t, &apply_pdb(&b, &bf, s, &f).unwrap()).unwrap();
        assert!(sup_diff(&lhs, &apply_pdb(&b, &bf, s + t, &f).unwrap()) < 1e-10);
        let lhs = apply_p0(&b, t, &apply_p0(&b, s, &f).unwrap()).unwrap();
        assert!(interior_sup_diff(&b, &lhs, &apply_p0(&b, s + t, &f).unwrap()) < 1e-10);
        for tt in [0.01, 0.5] {
            let a = inner_mu(&b, &apply_pd(&b, tt, &f).unwrap(), &g);
            let c = inner_mu(&b, &f, &apply_pd(&b, tt, &g).unwrap());
            assert!((a - c).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ground_state_transform_identity(seed in any::<u64>(), t in 0.01f64..2.0) {
        use rand::Rng;
        let b = pi_basis(513, 64);
        let mut rng = RngStream::new(seed, 0).rng();
        let f: Vec<f64> = (0..513).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = ground_transform_pd(&b, t, &f).unwrap();
        let rhs = apply_p0(&b, t, &f).unwrap();
        prop_assert!(interior_sup_diff(&b, &lhs, &rhs) < 1e-9);
    }
}

#[test]
fn survival_dirac_midpoint() {
    let b = pi_basis(4097, 256);
    let nu = InitialDistribution::dirac(&b, &[FRAC_PI_2]).unwrap();
    let bf = sqrt_b();
    assert!((survival_limit(&b, &nu) - 4.0 / PI).abs() < 1e-14);
    for t in [0.5, 1.0, 3.0] {
        // μ(φ_m)ν(φ_m) = (4/(kπ)) sin(kπ/2) with k = m + 1 odd, D_m = k − 1.
        let series: f64 = (1..=256)
            .step_by(2)
            .map(|k| {
                let k = k as f64;
                (-(k - 1.0) * t).exp() * 4.0 / (k * PI) * (k * FRAC_PI_2).sin()
            })
            .sum();
        let q = survival_scaled(&b, &bf, &nu, t).unwrap();
        assert!((q - series).abs() < 1e-13, "{q} {series}");
        let two = 4.0 / PI - 4.0 / (3.0 * PI) * (-2.0 * t).exp();
        assert!((q - two).abs() < 1.01 * 4.0 / (5.0 * PI) * (-4.0 * t).exp());
    }
    let q = survival_scaled(&b, &bf, &nu, 60.0).unwrap();
    assert!((q - 1.27324).abs() < 1e-5);
}

#[test]
fn survival_at_time_zero_is_parseval_deficit() {
    let b = pi_basis(4097, 256);
    let nu = InitialDistribution::reference(&b).unwrap();
    let q0 = survival_scaled(&b, &sqrt_b(), &nu, 0.0).unwrap();
    let bessel: f64 = b.mu_coeffs().iter().map(|c| c * c).sum();
    assert!((q0 - bessel).abs() < 1e-15);
    // Deficit Σ_{k odd > K} 8/(kπ)² ≈ 4/(π² K).
    assert!(q0 < 1.0 && ((1.0 - q0) * PI * PI * 256.0 / 4.0 - 1.0).abs() < 0.01, "{q0}");
}

fn excess_slope(b: &SpectralBasis, nu: &InitialDistribution) -> f64 {
    let lin = BernsteinFunction::linear(1.0).unwrap();
    let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0]
        .iter()
        .map(|t| (*t, survival_excess(b, &lin, nu, *t).abs().ln()))
        .collect();
    linear_fit(&pts).slope
}

#[test]
fn survival_decay_rate_linear_subordinator() {
    let b = linear_fd_basis();
    let nu = InitialDistribution::ground_state(&b).unwrap();
    assert!(b.mu_coeffs()[1].abs() > 1e-3 && nu.coeffs()[1].abs() > 1e-3);
    let rate = b.lambdas()[1] - b.lambdas()[0];
    let slope = excess_slope(&b, &nu);
    assert!((slope + rate).abs() < 1e-6 * rate, "{slope} vs {rate}");

    // Symmetric interval: μ(φ_1) = 0, so the first visible rate is λ_2 − λ_0.
    let b = pi_basis(4097, 64);
    let nu = InitialDistribution::ground_state(&b).unwrap();
    assert!(b.mu_coeffs()[1] == 0.0);
    let slope = excess_slope(&b, &nu);
    assert!((slope + 8.0).abs() < 1e-6, "{slope}");
}

#[test]
fn t0_is_reported() {
    let b = pi_basis(1025, 128);
    let nu = InitialDistribution::dirac(&b, &[0.3]).unwrap();
    let t0 = default_t0(&b, &sqrt_b(), &nu, &t0_probe()).unwrap();
    let q = survival_scaled(&b, &sqrt_b(), &nu, t0).unwrap();
    assert!(q >= 0.5 * survival_limit(&b, &nu));
}

#[test]
fn eta_examples() {
    let b = pi_basis(4097, 128);
    let mu0 = InitialDistribution::ground_state(&b).unwrap();
    for t in [0.1, 1.0] {
        let e = eta(&b, &mu0, t).unwrap();
        let p = apply_p0(&b, t, b.phi(0)).unwrap();
        assert!(interior_sup_diff(&b, &e, &p) < 1e-10);
        let min = (1..4096).map(|i| e[i]).fold(f64::INFINITY, f64::min);
        assert!(min > -1e-6);
    }
    // t → ∞: η → ν(φ_0) = μ(φ_0³) = 8√2/(3π).
    let oracle = graded_integral(0.0, PI, 4, 32, |x| (SQRT_2 * x.sin()).powi(3)) / PI;
    assert!((oracle - 8.0 * SQRT_2 / (3.0 * PI)).abs() < 1e-14);
    let e = eta(&b, &mu0, 30.0).unwrap();
    assert!((e[2048] - oracle).abs() < 1e-9);

    let i = 1300;
    let x0 = b.grid().nodes()[i];
    let nu = InitialDistribution::dirac(&b, &[x0]).unwrap();
    let t = 0.05;
    let e = eta(&b, &nu, t).unwrap();
    let k: Vec<f64> = heat_kernel_p0(&b, t, i).unwrap().iter().map(|v| v * b.phi(0)[i]).collect();
    assert!(sup_diff(&e, &k) < 1e-10 * k.iter().fold(0.0, |a: f64, v| a.max(v.abs())));

    let lin = BernsteinFunction::linear(1.0).unwrap();
    for nu in [nu, InitialDistribution::reference(&b).unwrap()] {
        for t in [0.2, 1.5] {
            let e = eta(&b, &nu, t).unwrap();
            let lhs = inner_mu(&b, &e, b.phi(0)) * (-b.lambdas()[0] * t).exp();
            let rhs = survival_probability(&b, &lin, &nu, t);
            assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} {rhs}");
        }
    }
}

#[test]
fn smoothed_initial_examples() {
    let b = pi_basis(4097, 256);
    let bf = sqrt_b();
    let nu = InitialDistribution::dirac(&b, &[1.0]).unwrap();
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|e| (smoothed_initial(&b, &bf, &nu, *e).unwrap().coeffs()[1] - nu.coeffs()[1]).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(smoothed_initial(&b, &bf, &nu, 0.0).is_err());

    let gamma = nu.coeffs()[0] / b.sup_norms()[0];
    for eps in [0.05, 0.5] {
        let s = smoothed_initial(&b, &bf, &nu, eps).unwrap();
        assert!(s.coeffs()[0] > 0.0);
        for m in 0..64 {
            let (a, c) = (s.coeffs()[m].abs(), nu.coeffs()[m].abs());
            let lo = (-bf.eval(b.lambdas()[m]).unwrap() * eps).exp() * c;
            assert!(lo <= a * (1.0 + 1e-12) && a <= c / gamma * (1.0 + 1e-12), "m = {m}");
        }
    }

    let lin = BernsteinFunction::linear(1.0).unwrap();
    let mid = InitialDistribution::dirac(&b, &[FRAC_PI_2]).unwrap();
    let s = smoothed_initial(&b, &lin, &mid, 0.1).unwrap();
    let denom = apply_pd(&b, 0.1, &vec![1.0; 4097]).unwrap()[2048];
    let want = (-0.1f64).exp() * SQRT_2 / denom;
    assert!((s.coeffs()[0] - want).abs() < 1e-6 * want);

    let mid = InitialDistribution::dirac(&pi_basis(4097, 1024), &[FRAC_PI_2]).unwrap();
    let wide = pi_basis(4097, 1024);
    let eps = [0.2, 0.1, 0.05];
    let sups: Vec<f64> = eps
        .iter()
        .map(|e| density_ratio_sup(&wide, &smoothed_initial(&wide, &bf, &mid, *e).unwrap()))
        .collect();
    let pts: Vec<(f64, f64)> = eps.iter().zip(&sups).map(|(e, s)| (e.ln(), s.ln())).collect();
    let slope = linear_fit(&pts).slope;
    assert!(slope >= -3.0, "growth exponent {slope}");
    let c = eps.iter().zip(&sups).map(|(e, s)| s * e.powi(3)).fold(0.0, f64::max);
    assert!(sups.iter().zip(&eps).all(|(s, e)| *s <= c * e.powi(-3)));
}

#[test]
fn ultracontractivity_constant_is_finite() {
    let b = pi_basis(1025, 128);
    let x = b.grid().nodes().to_vec();
    let probes: Vec<Vec<f64>> = vec![
        x.iter().map(|v| (2.0 * v).cos()).collect(),
        x.iter().map(|v| if *v < 1.0 { 1.0 } else { 0.0 }).collect(),
        x.iter().map(|v| v.powi(3)).collect(),
    ];
    let times = [0.25, 0.5, 1.0, 2.0, 4.0];
    let r = ultracontractivity_fit(&b, &probes, &times).unwrap();
    assert!(r.constant.is_finite() && r.constant > 0.0);
    // Probe 0 is symmetric (no first mode); beyond t = 4 round-off dominates the ratio.
    for k in 1..probes.len() {
        let at = |t: f64| r.samples.iter().find(|s| s.0 == t && s.1 == k).unwrap().2;
        assert!((at(4.0) - at(2.0)).abs() <= 1e-3 * at(2.0), "{:?}", r.samples);
    }
    let inv = ground_inverse_report(&b);
    assert!(inv[0].1.is_finite() && inv[1].1.is_finite());
}

#[test]
fn subordination_identity_by_monte_carlo() {
    let b = pi_basis(4097, 256);
    let bf = BernsteinFunction::stable_drift(0.1, 1.0, 0.5).unwrap();
    let t = 0.5;
    let exact = apply_pdb(&b, &bf, t, &vec![1.0; 4097]).unwrap()[2048];
    let coeff: Vec<(f64, f64)> = (0..256)
        .step_by(2)
        .map(|m| {
            let k = (m + 1) as f64;
            (k * k, 4.0 / (k * PI) * (k * FRAC_PI_2).sin())
        })
        .collect();
    let mut rng = RngStream::new(7, 3).rng();
    let draws: Vec<f64> = (0..40_000)
        .map(|_| {
            let s = sample_subordinator_increment(&bf, t, &mut rng).unwrap();
            coeff.iter().map(|(l, c)| (-l * s).exp() * c).sum()
        })
        .collect();
    let (m, se) = mean_and_se(&draws);
    assert!((m - exact).abs() <= 3.0 * se, "{m} ± {se} vs {exact}");
}
