//! Dirichlet, subordinated and ground-state semigroups as truncated spectral series.
//!
//! Every series here carries the factor `e^{-B(λ_0)t}` (or `e^{-λ_0 t}`)
//! analytically removed, so exponents are the nonnegative gaps `D_m` and
//! `λ_m − λ_0`.

use crate::bernstein::{exponents, BernsteinFunction};
use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

/// How an initial law was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    /// Density `h` with respect to `μ`, sampled on the grid.
    Density(Vec<f64>),
    /// Point mass at an interior point (one coordinate per axis).
    Dirac(Vec<f64>),
    /// `ν_ε`, given by its coefficients; `density` is their synthesis.
    Smoothed { eps: f64, density: Vec<f64> },
}

/// Initial law `ν` together with its coefficients `ν(φ_m)`.
#[derive(Debug, Clone)]
pub struct InitialDistribution {
    kind: InitialKind,
    coeffs: Vec<f64>,
}

impl InitialDistribution {
    pub fn new(basis: &SpectralBasis, kind: InitialKind) -> Result<Self> {
        let coeffs = project_measure(basis, &kind)?;
        Self::from_parts(kind, coeffs)
    }

    fn from_parts(kind: InitialKind, coeffs: Vec<f64>) -> Result<Self> {
        if !(coeffs[0] > 0.0) {
            return Err(Error::Measure(format!("ν(φ₀) = {:e} must be positive", coeffs[0])));
        }
        Ok(Self { kind, coeffs })
    }

    pub fn dirac(basis: &SpectralBasis, x0: &[f64]) -> Result<Self> {
        Self::new(basis, InitialKind::Dirac(x0.to_vec()))
    }

    pub fn density(basis: &SpectralBasis, h: Vec<f64>) -> Result<Self> {
        Self::new(basis, InitialKind::Density(h))
    }

    /// `ν = μ`.
    pub fn reference(basis: &SpectralBasis) -> Result<Self> {
        let mut nu = Self::density(basis, vec![1.0; basis.grid().len()])?;
        nu.coeffs = basis.mu_coeffs().to_vec();
        Ok(nu)
    }

    /// `ν = μ₀ = φ₀² μ`.
    pub fn ground_state(basis: &SpectralBasis) -> Result<Self> {
        Self::density(basis, basis.phi(0).iter().map(|p| p * p).collect())
    }

    pub fn kind(&self) -> &InitialKind {
        &self.kind
    }

    /// `ν(φ_m)` for every retained mode.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self.kind, InitialKind::Dirac(_))
    }

    /// Keep the first `k` coefficients.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            kind: self.kind.clone(),
            coeffs: self.coeffs[..k.min(self.coeffs.len())].to_vec(),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            InitialKind::Density(_) => "density".into(),
            InitialKind::Dirac(x) => format!("dirac{x:?}"),
            InitialKind::Smoothed { eps, .. } => format!("smoothed(eps={eps})"),
        }
    }
}

/// Coefficients `ν(φ_m)`.
pub fn project_measure(basis: &SpectralBasis, nu: &InitialKind) -> Result<Vec<f64>> {
    match nu {
        InitialKind::Density(h) | InitialKind::Smoothed { density: h, .. } => {
            if h.len() != basis.grid().len() {
                return Err(Error::Measure(format!(
                    "density has {} values for {} nodes",
                    h.len(),
                    basis.grid().len()
                )));
            }
            if let InitialKind::Density(_) = nu {
                if let Some(v) = h.iter().find(|v| !(**v >= 0.0)) {
                    return Err(Error::Measure(format!("density takes negative value {v:e}")));
                }
                let mass = basis.integrate_mu(h);
                if (mass - 1.0).abs() > 1e-8 {
                    return Err(Error::Measure(format!("density has μ-mass {mass}, expected 1")));
                }
            }
            Ok(basis.project(h))
        }
        InitialKind::Dirac(x0) => {
            let stencil = dirac_stencil(basis, x0)?;
            Ok((0..basis.len())
                .map(|k| {
                    let phi = basis.phi(k);
                    stencil.iter().map(|(i, w)| w * phi[*i]).sum()
                })
                .collect())
        }
    }
}

/// Interpolation weights of a point evaluation: cubic Lagrange on the four
/// nearest nodes per axis, tensorized.
pub(crate) fn dirac_stencil(basis: &SpectralBasis, x0: &[f64]) -> Result<Vec<(usize, f64)>> {
    let grid = basis.grid();
    if x0.len() != grid.dim() {
        return Err(Error::Measure(format!(
            "point has {} coordinates, domain has dimension {}",
            x0.len(),
            grid.dim()
        )));
    }
    let mut per_axis = Vec::with_capacity(grid.dim());
    for (x, axis) in x0.iter().zip(grid.axes()) {
        let nodes = &axis.nodes;
        let (lo, hi) = (nodes[0], *nodes.last().unwrap());
        let tol = 1e-12 * (hi - lo);
        if !(*x > lo + tol && *x < hi - tol) {
            return Err(Error::Measure(format!(
                "point mass at {x} is not strictly inside [{lo}, {hi}]; it would give ν(interior) = 0"
            )));
        }
        let n = nodes.len();
        let cell = nodes.partition_point(|v| *v <= *x).saturating_sub(1).min(n - 2);
        let start = cell.saturating_sub(1).min(n - 4);
        let idx: Vec<usize> = (start..start + 4).collect();
        let w: Vec<f64> = idx
            .iter()
            .map(|&j| {
                idx.iter()
                    .filter(|&&l| l != j)
                    .map(|&l| (x - nodes[l]) / (nodes[j] - nodes[l]))
                    .product()
            })
            .collect();
        per_axis.push(idx.into_iter().zip(w).collect::<Vec<_>>());
    }
    let mut out: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in &per_axis {
        out = out
            .iter()
            .flat_map(|(idx, w)| {
                axis.iter().map(move |(j, v)| {
                    let mut i = idx.clone();
                    i.push(*j);
                    (i, w * v)
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|(i, w)| (grid.flat_index(&i), w)).collect())
}

fn positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive, got {t}")))
    }
}

fn apply_with(basis: &SpectralBasis, f: &[f64], rates: impl Fn(usize) -> f64) -> Vec<f64> {
    let c: Vec<f64> = basis.project(f).into_iter().enumerate().map(|(m, c)| c * rates(m)).collect();
    basis.synthesize(&c)
}

/// `P_t^D f = Σ e^{-λ_m t} μ(φ_m f) φ_m`.
pub fn apply_pd(basis: &SpectralBasis, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    positive_time(t)?;
    let l = basis.lambdas();
    Ok(apply_with(basis, f, |m| (-l[m] * t).exp()))
}

/// `P_t^{D,B} f = Σ e^{-B(λ_m) t} μ(φ_m f) φ_m`.
pub fn apply_pdb(basis: &SpectralBasis, b: &BernsteinFunction, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    positive_time(t)?;
    let l = basis.lambdas();
    Ok(apply_with(basis, f, |m| (-b.value(l[m]) * t).exp()))
}

/// `P_t^0 f = Σ μ₀(f ψ_m) e^{-(λ_m−λ_0)t} ψ_m` with `ψ_m = φ_m φ_0⁻¹`.
///
/// Boundary values use the continuous extension of `ψ_m`.
pub fn apply_p0(basis: &SpectralBasis, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let l = basis.lambdas();
    let c: Vec<f64> = basis
        .project_ground(f)
        .into_iter()
        .enumerate()
        .map(|(m, c)| c * (-(l[m] - l[0]) * t).exp())
        .collect();
    Ok(basis.synthesize_ratio(&c))
}

/// Ground-state transform of `P_t^D`: `e^{λ_0 t} φ_0⁻¹ P_t^D(f φ_0)`, interior nodes only
/// (boundary entries are `NaN`).
pub fn ground_transform_pd(basis: &SpectralBasis, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    positive_time(t)?;
    let p0 = basis.phi(0);
    let g: Vec<f64> = f.iter().zip(p0).map(|(a, b)| a * b).collect();
    let l = basis.lambdas();
    let out = apply_with(basis, &g, |m| (-(l[m] - l[0]) * t).exp());
    Ok(out
        .iter()
        .zip(p0)
        .enumerate()
        .map(|(i, (v, p))| if basis.grid().is_boundary(i) { f64::NAN } else { v / p })
        .collect())
}

/// `Σ_{m≥1} e^{-D_m t} μ(φ_m) ν(φ_m)`, the part of `Q(t)` that decays.
pub fn survival_excess(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, t: f64) -> f64 {
    let d = exponents(b, basis).gaps;
    let mu = basis.mu_coeffs();
    nu.coeffs()
        .iter()
        .zip(mu)
        .zip(&d)
        .skip(1)
        .map(|((n, m), dm)| (-dm * t).exp() * m * n)
        .sum()
}

/// `μ(φ_0) ν(φ_0)`, the limit of `Q(t)`.
pub fn survival_limit(basis: &SpectralBasis, nu: &InitialDistribution) -> f64 {
    basis.mu_coeffs()[0] * nu.coeffs()[0]
}

/// Scaled survival `Q(t) = e^{B(λ_0)t} P^ν(t < σ)`.
pub fn survival_scaled(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let q = survival_limit(basis, nu) + survival_excess(basis, b, nu, t);
    if q > 0.0 {
        Ok(q)
    } else {
        Err(Error::Survival { t, q })
    }
}

/// `ln P^ν(t < σ) = ln Q(t) − B(λ_0) t`.
pub fn log_survival(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, t: f64) -> Result<f64> {
    let q = survival_scaled(basis, b, nu, t)?;
    Ok(q.ln() - b.value(basis.lambdas()[0]) * t)
}

/// Smallest probe time with `Q(t) ≥ ½ μ(φ_0) ν(φ_0)`.
pub fn default_t0(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, probe: &[f64]) -> Option<f64> {
    let half = 0.5 * survival_limit(basis, nu);
    probe
        .iter()
        .copied()
        .find(|t| survival_scaled(basis, b, nu, *t).is_ok_and(|q| q >= half))
}

/// Geometric probe `2^{-10}, …, 2^{6}` used for [`default_t0`].
pub fn t0_probe() -> Vec<f64> {
    (-10..=6).map(|k| 2f64.powi(k)).collect()
}

/// `η_t^ν = ν(φ_0) + Σ_{m≥1} ν(φ_m) e^{-(λ_m−λ_0)t} φ_m φ_0⁻¹`.
pub fn eta(basis: &SpectralBasis, nu: &InitialDistribution, t: f64) -> Result<Vec<f64>> {
    positive_time(t)?;
    let l = basis.lambdas();
    let c: Vec<f64> = nu
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| c * (-(l[m] - l[0]) * t).exp())
        .collect();
    Ok(basis.synthesize_ratio(&c))
}

/// Ground-state heat kernel `p_t^0(x_i, ·)` for grid node `i`.
pub fn heat_kernel_p0(basis: &SpectralBasis, t: f64, i: usize) -> Result<Vec<f64>> {
    positive_time(t)?;
    let l = basis.lambdas();
    let c: Vec<f64> = (0..basis.len())
        .map(|m| (-(l[m] - l[0]) * t).exp() * basis.ratio(m)[i])
        .collect();
    Ok(basis.synthesize_ratio(&c))
}

/// `ν(P_t^{D,B} 1)` computed as `Σ e^{-B(λ_m)t} ν(φ_m) μ(φ_m)`.
pub fn survival_probability(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, t: f64) -> f64 {
    let l = basis.lambdas();
    nu.coeffs()
        .iter()
        .zip(basis.mu_coeffs())
        .zip(l)
        .map(|((n, m), lm)| (-b.value(*lm) * t).exp() * n * m)
        .sum()
}

/// `ν_ε = ν P_ε^{D,B} / ν(P_ε^{D,B} 1)`, coefficients `e^{-B(λ_m)ε} ν(φ_m) / ν(P_ε^{D,B} 1)`.
pub fn smoothed_initial(
    basis: &SpectralBasis,
    b: &BernsteinFunction,
    nu: &InitialDistribution,
    eps: f64,
) -> Result<InitialDistribution> {
    positive_time(eps)?;
    let l = basis.lambdas();
    let b0 = b.value(l[0]);
    // Normalize with the B(λ_0) factor removed from both numerator and denominator.
    let norm: f64 = nu
        .coeffs()
        .iter()
        .zip(basis.mu_coeffs())
        .zip(l)
        .map(|((n, m), lm)| (-(b.value(*lm) - b0) * eps).exp() * n * m)
        .sum();
    if !(norm > 0.0) {
        return Err(Error::Survival { t: eps, q: norm });
    }
    let coeffs: Vec<f64> = nu
        .coeffs()
        .iter()
        .zip(l)
        .map(|(n, lm)| (-(b.value(*lm) - b0) * eps).exp() * n / norm)
        .collect();
    let density = basis.synthesize(&coeffs);
    InitialDistribution::from_parts(InitialKind::Smoothed { eps, density }, coeffs)
}

/// `‖h φ_0⁻¹‖_∞` for a law given by coefficients (`h = Σ c_m φ_m`).
pub fn density_ratio_sup(basis: &SpectralBasis, nu: &InitialDistribution) -> f64 {
    basis
        .synthesize_ratio(nu.coeffs())
        .iter()
        .fold(0.0, |a, v| a.max(v.abs()))
}

/// Fitted constant for the intrinsic-ultracontractivity bound
/// `‖P_t^0 f − μ₀(f)‖_∞ ≤ C e^{-(λ_1−λ_0)t} (1∧t)^{-(d+2)/2} ‖f‖_{L¹(μ₀)}`.
#[derive(Debug, Clone)]
pub struct UltracontractivityReport {
    /// `(t, probe index, ratio of left side to the rate)`.
    pub samples: Vec<(f64, usize, f64)>,
    pub constant: f64,
}

pub fn ultracontractivity_fit(basis: &SpectralBasis, probes: &[Vec<f64>], times: &[f64]) -> Result<UltracontractivityReport> {
    let l = basis.lambdas();
    let gap = l[1] - l[0];
    let d = basis.dim() as f64;
    let w0 = basis.mu0_weights();
    let mut samples = Vec::new();
    for &t in times {
        positive_time(t)?;
        let rate = (-gap * t).exp() * t.min(1.0).powf(-(d + 2.0) / 2.0);
        for (k, f) in probes.iter().enumerate() {
            let mean: f64 = f.iter().zip(&w0).map(|(a, w)| a * w).sum();
            let l1: f64 = f.iter().zip(&w0).map(|(a, w)| a.abs() * w).sum();
            let pf = apply_p0(basis, t, f)?;
            let sup = pf.iter().fold(0.0_f64, |a, v| a.max((v - mean).abs()));
            samples.push((t, k, sup / (rate * l1)));
        }
    }
    let constant = samples.iter().map(|s| s.2).fold(0.0, f64::max);
    Ok(UltracontractivityReport { samples, constant })
}

/// `‖φ_0⁻¹‖_{L^p(μ₀)}` for `p ∈ {1, 2, 2.9}`.
pub fn ground_inverse_report(basis: &SpectralBasis) -> Vec<(f64, f64)> {
    [1.0, 2.0, 2.9].iter().map(|p| (*p, basis.inverse_ground_norm(*p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, eigensystem_closed_form, Domain};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn basis(n: usize, k: usize) -> SpectralBasis {
        let grid = build_grid(&Domain::interval(PI).unwrap(), n).unwrap();
        eigensystem_closed_form(PI, k, &grid).unwrap()
    }

    #[test]
    fn dirac_coefficients() {
        let b = basis(257, 8);
        let nu = InitialDistribution::dirac(&b, &[FRAC_PI_2]).unwrap();
        assert_relative_eq!(nu.coeffs()[0], SQRT_2, max_relative = 1e-14);
        assert!(nu.coeffs()[1].abs() < 1e-14);
        assert_relative_eq!(nu.coeffs()[2], -SQRT_2, max_relative = 1e-14);
        assert!(InitialDistribution::dirac(&b, &[0.0]).is_err());
        assert!(InitialDistribution::dirac(&b, &[PI]).is_err());
    }

    #[test]
    fn dirac_off_node_interpolates() {
        let b = basis(1025, 4);
        let x0 = 1.2345;
        let nu = InitialDistribution::dirac(&b, &[x0]).unwrap();
        for k in 0..4 {
            let exact = SQRT_2 * ((k + 1) as f64 * x0).sin();
            assert!((nu.coeffs()[k] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn reference_coefficients() {
        let b = basis(2049, 6);
        let nu = InitialDistribution::reference(&b).unwrap();
        assert_relative_eq!(nu.coeffs()[0], 2.0 * SQRT_2 / PI, max_relative = 1e-6);
        assert!(nu.coeffs()[1].abs() < 1e-12);
        let bad = vec![2.0; b.grid().len()];
        assert!(InitialDistribution::density(&b, bad).is_err());
    }

    #[test]
    fn pd_on_constant() {
        let b = basis(2049, 200);
        let one = vec![1.0; b.grid().len()];
        let p = apply_pd(&b, 1.0, &one).unwrap();
        let mid = b.grid().len() / 2;
        let exact: f64 = (0..400)
            .step_by(2)
            .map(|k| {
                let j = (k + 1) as f64;
                (-j * j).exp() * 2.0 * SQRT_2 / (j * PI) * SQRT_2 * (j * FRAC_PI_2).sin()
            })
            .sum();
        assert!((p[mid] - exact).abs() < 1e-6);
        assert!((p[mid] - 4.0 / PI * (-1f64).exp()).abs() < 1e-3);
        assert!(apply_pd(&b, 0.0, &one).is_err());
    }

    #[test]
    fn survival_closed_form() {
        let b = basis(1025, 64);
        let s = BernsteinFunction::stable(0.5).unwrap();
        let nu = InitialDistribution::dirac(&b, &[FRAC_PI_2]).unwrap();
        let q = survival_scaled(&b, &s, &nu, 3.0).unwrap();
        let exact: f64 = (0..64)
            .step_by(2)
            .map(|k| {
                let j = (k + 1) as f64;
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                (-(j - 1.0) * 3.0).exp() * 4.0 / (j * PI) * sign
            })
            .sum();
        assert!((q - exact).abs() < 1e-6);
        assert_relative_eq!(survival_limit(&b, &nu), 4.0 / PI, max_relative = 1e-6);
    }
}
