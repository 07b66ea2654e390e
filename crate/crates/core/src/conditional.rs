//! Spectral density of the conditional empirical measure and grid measures.
//!
//! With `ψ_m = φ_m φ_0⁻¹` and `D_m = B(λ_m) − B(λ_0)`,
//!
//! ```text
//! dμ_t/dμ₀ = 1 + ρ_t,   ρ_t = Σ_{m≥1} (c̃_m − a_m) ψ_m + X_t,
//! c̃_m = [μ(φ₀)ν(φ_m) + ν(φ₀)μ(φ_m)] / (t Q(t) D_m),   a_m = c̃_m e^{-D_m t},
//! X_t = (1/(tQ)) Σ_{m,n≥1} ν(φ_m)μ(φ_n) T_mn ψ_mψ_n − (1/Q) Σ_{m≥1} e^{-D_m t} μ(φ_m)ν(φ_m),
//! T_mn = ∫₀ᵗ e^{-D_m s − D_n(t−s)} ds.
//! ```

use rayon::prelude::*;

use crate::bernstein::{exponents, BernsteinFunction};
use crate::error::{Error, Result};
use crate::semigroup::{survival_scaled, InitialDistribution};
use crate::spectral::{Grid, SpectralBasis};

pub const MIN_KCROSS: usize = 8;
pub const DEFAULT_KCROSS: usize = 128;
pub const CLAMP_WARN: f64 = 1e-4;
pub const CLAMP_FAIL: f64 = 1e-2;

/// `(e^{-a} − e^{-b}) / (b − a)`, equal to `e^{-a}` when `a = b`.
pub fn expdiff(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let delta = hi - lo;
    let scale = (-lo).exp();
    if delta < 1e-8 {
        scale * (1.0 - delta / 2.0 + delta * delta / 6.0)
    } else {
        scale * (-(-delta).exp_m1() / delta)
    }
}

/// Regularization applied to a set of coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub beta: f64,
    /// Smoothing time `t^{-β}`.
    pub s: f64,
}

/// Rescaled spectral decomposition of `ρ_t`.
#[derive(Debug, Clone)]
pub struct ConditionalCoeffs {
    pub t: f64,
    /// Scaled survival `Q(t)`.
    pub q: f64,
    pub kcross: usize,
    /// Coefficients of `ρ̃_t` in the basis `ψ_m` (entry 0 is zero).
    pub tilde: Vec<f64>,
    /// Coefficients of `A_t`.
    pub a: Vec<f64>,
    /// Grid values of the ξ part `X_t`.
    pub xi: Vec<f64>,
    /// Bound on the double-series terms between `Kcross` and `K`.
    pub cross_tail: f64,
    pub regularization: Option<Regularization>,
}

pub fn conditional_coeffs(
    basis: &SpectralBasis,
    b: &BernsteinFunction,
    nu: &InitialDistribution,
    t: f64,
    kcross: usize,
) -> Result<ConditionalCoeffs> {
    let k = basis.len();
    if kcross < MIN_KCROSS {
        return Err(Error::Config(format!("Kcross = {kcross} is below the minimum {MIN_KCROSS}")));
    }
    if kcross > k {
        return Err(Error::Config(format!("Kcross = {kcross} exceeds K = {k}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let q = survival_scaled(basis, b, nu, t)?;
    let d = exponents(b, basis).gaps;
    let mu = basis.mu_coeffs();
    let nv = nu.coeffs();

    let mut tilde = vec![0.0; k];
    let mut a = vec![0.0; k];
    for m in 1..k {
        if d[m] <= 0.0 {
            return Err(Error::Domain(format!("degenerate gap D_{m} = {}", d[m])));
        }
        tilde[m] = (mu[0] * nv[m] + nv[0] * mu[m]) / (t * q * d[m]);
        a[m] = tilde[m] * (-d[m] * t).exp();
    }

    // G_mn = ν_m μ_n T_mn / (tQ), symmetrized since only ψ_mψ_n enters.
    let kc = kcross;
    let mut g = vec![0.0; kc * kc];
    for m in 1..kc {
        for n in 1..kc {
            let tmn = t * expdiff(d[m] * t, d[n] * t);
            g[m * kc + n] = nv[m] * mu[n] * tmn / (t * q);
        }
    }
    for m in 1..kc {
        for n in (m + 1)..kc {
            let s = 0.5 * (g[m * kc + n] + g[n * kc + m]);
            g[m * kc + n] = s;
            g[n * kc + m] = s;
        }
    }
    let shift: f64 = (1..kc).map(|m| (-d[m] * t).exp() * mu[m] * nv[m]).sum::<f64>() / q;
    let ratios: Vec<&[f64]> = (0..kc).map(|m| basis.ratio(m)).collect();
    let xi: Vec<f64> = (0..basis.grid().len())
        .into_par_iter()
        .map(|i| {
            let psi: Vec<f64> = ratios.iter().map(|r| r[i]).collect();
            let mut total = 0.0;
            for m in 1..kc {
                let row = &g[m * kc..(m + 1) * kc];
                let inner: f64 = row[1..].iter().zip(&psi[1..]).map(|(x, y)| x * y).sum();
                total += psi[m] * inner;
            }
            total - shift
        })
        .collect();

    let sup = basis.ratio_sup_norms();
    let mut cross_tail = 0.0;
    for m in 1..k {
        for n in 1..k {
            if m >= kc || n >= kc {
                let tmn = t * expdiff(d[m] * t, d[n] * t);
                cross_tail += (nv[m] * mu[n]).abs() * tmn * sup[m] * sup[n] / (t * q);
            }
        }
    }

    Ok(ConditionalCoeffs {
        t,
        q,
        kcross,
        tilde,
        a,
        xi,
        cross_tail,
        regularization: None,
    })
}

impl ConditionalCoeffs {
    /// `ρ_t` on the grid.
    pub fn rho(&self, basis: &SpectralBasis) -> Vec<f64> {
        let c: Vec<f64> = self.tilde.iter().zip(&self.a).map(|(x, y)| x - y).collect();
        let mut r = basis.synthesize_ratio(&c);
        r.iter_mut().zip(&self.xi).for_each(|(v, x)| *v += x);
        r
    }

    /// `ρ̃_t` on the grid.
    pub fn rho_tilde(&self, basis: &SpectralBasis) -> Vec<f64> {
        basis.synthesize_ratio(&self.tilde)
    }

    /// `μ₀(ρ_t)`.
    pub fn mean(&self, basis: &SpectralBasis) -> f64 {
        mu0_integral(basis, &self.rho(basis))
    }

    /// `μ₀(X_t)`.
    pub fn xi_mean(&self, basis: &SpectralBasis) -> f64 {
        mu0_integral(basis, &self.xi)
    }

    /// Sup-norm of `ρ̃` over the grid.
    pub fn tilde_sup(&self, basis: &SpectralBasis) -> f64 {
        self.rho_tilde(basis).iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

fn mu0_integral(basis: &SpectralBasis, f: &[f64]) -> f64 {
    f.iter().zip(basis.mu0_weights()).map(|(a, w)| a * w).sum()
}

/// Largest admissible regularization exponent `2/(2d − 2α + 1)`.
pub fn beta_limit(d: usize, alpha: f64) -> f64 {
    2.0 / (2.0 * d as f64 - 2.0 * alpha + 1.0)
}

/// Coefficients of `μ_{t,β}` (and, through [`ConditionalCoeffs::rho_tilde`], of
/// `μ̃_{t,β}`): every `ψ_m` component is damped by `e^{-(λ_m−λ_0)t^{-β}}`.
pub fn regularize(basis: &SpectralBasis, coeffs: &ConditionalCoeffs, beta: f64, alpha: f64) -> Result<ConditionalCoeffs> {
    let limit = beta_limit(basis.dim(), alpha);
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::Config(format!("β = {beta} outside (0, {limit})")));
    }
    if coeffs.regularization.is_some() {
        return Err(Error::Config("coefficients are already regularized".into()));
    }
    let s = coeffs.t.powf(-beta);
    let l = basis.lambdas();
    let damp: Vec<f64> = l.iter().map(|lm| (-(lm - l[0]) * s).exp()).collect();
    let tilde = coeffs.tilde.iter().zip(&damp).map(|(c, e)| c * e).collect();
    let a = coeffs.a.iter().zip(&damp).map(|(c, e)| c * e).collect();
    let xi_modes: Vec<f64> = basis
        .project_ground(&coeffs.xi)
        .into_iter()
        .zip(&damp)
        .map(|(c, e)| c * e)
        .collect();
    Ok(ConditionalCoeffs {
        xi: basis.synthesize_ratio(&xi_modes),
        tilde,
        a,
        regularization: Some(Regularization { beta, s }),
        ..coeffs.clone()
    })
}

/// Reference measure a grid density is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Lebesgue,
    Mu,
    Mu0,
}

impl Reference {
    pub fn tag(self) -> &'static str {
        match self {
            Reference::Lebesgue => "lebesgue",
            Reference::Mu => "mu",
            Reference::Mu0 => "mu0",
        }
    }
}

/// Density values on a grid with respect to a declared reference measure.
#[derive(Debug, Clone)]
pub struct GridMeasure {
    grid: Grid,
    reference: Reference,
    /// Lebesgue density of the reference measure at each node.
    reference_density: Vec<f64>,
    density: Vec<f64>,
    clamped_mass: f64,
    warning: Option<String>,
}

impl GridMeasure {
    /// Measure with the given density; negative lobes are clamped to zero and
    /// the remainder renormalized to unit mass.
    pub fn new(grid: Grid, reference: Reference, reference_density: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if reference_density.len() != grid.len() || density.len() != grid.len() {
            return Err(Error::Measure("density length does not match the grid".into()));
        }
        let w = grid.weights();
        let mut clamped = 0.0;
        let mut density = density;
        for ((f, r), wi) in density.iter_mut().zip(&reference_density).zip(&w) {
            if *f < 0.0 {
                clamped -= *f * r * wi;
                *f = 0.0;
            }
        }
        let mass: f64 = density.iter().zip(&reference_density).zip(&w).map(|((f, r), wi)| f * r * wi).sum();
        if !(mass > 0.0) {
            return Err(Error::Measure("measure has no positive mass".into()));
        }
        density.iter_mut().for_each(|f| *f /= mass);
        Ok(Self {
            grid,
            reference,
            reference_density,
            density,
            clamped_mass: clamped,
            warning: None,
        })
    }

    /// Lebesgue density on a grid.
    pub fn lebesgue(grid: Grid, density: Vec<f64>) -> Result<Self> {
        let ones = vec![1.0; grid.len()];
        Self::new(grid, Reference::Lebesgue, ones, density)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Density with respect to Lebesgue measure.
    pub fn lebesgue_density(&self) -> Vec<f64> {
        self.density.iter().zip(&self.reference_density).map(|(f, r)| f * r).collect()
    }

    pub fn mass(&self) -> f64 {
        self.lebesgue_density().iter().zip(self.grid.weights()).map(|(f, w)| f * w).sum()
    }

    /// Negative mass removed before renormalization.
    pub fn clamped_mass(&self) -> f64 {
        self.clamped_mass
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }
}

fn ground_density(basis: &SpectralBasis) -> Vec<f64> {
    basis
        .phi(0)
        .iter()
        .zip(basis.u_values())
        .map(|(p, u)| p * p * u.exp())
        .collect()
}

/// `μ₀` itself.
pub fn ground_state_measure(basis: &SpectralBasis) -> Result<GridMeasure> {
    GridMeasure::new(
        basis.grid().clone(),
        Reference::Mu0,
        ground_density(basis),
        vec![1.0; basis.grid().len()],
    )
}

/// Measure `(1 + ρ) μ₀` for an arbitrary grid function `ρ`, with clamp checks.
pub fn measure_from_rho(basis: &SpectralBasis, rho: &[f64]) -> Result<GridMeasure> {
    let f: Vec<f64> = rho.iter().map(|r| 1.0 + r).collect();
    let mut m = GridMeasure::new(basis.grid().clone(), Reference::Mu0, ground_density(basis), f)?;
    if m.clamped_mass > CLAMP_FAIL {
        return Err(Error::Truncation {
            clamped: m.clamped_mass,
            limit: CLAMP_FAIL,
        });
    }
    if m.clamped_mass > CLAMP_WARN {
        m.warning = Some(format!("clamped negative mass {:e} exceeds {CLAMP_WARN:e}", m.clamped_mass));
    }
    Ok(m)
}

/// `μ_t` (or `μ_{t,β}` for regularized coefficients) on the grid.
pub fn density_on_grid(coeffs: &ConditionalCoeffs, basis: &SpectralBasis) -> Result<GridMeasure> {
    measure_from_rho(basis, &coeffs.rho(basis))
}

/// `μ̃_t` (or `μ̃_{t,β}`): `(1 + ρ̃) μ₀`.
pub fn tilde_density_on_grid(coeffs: &ConditionalCoeffs, basis: &SpectralBasis) -> Result<GridMeasure> {
    measure_from_rho(basis, &coeffs.rho_tilde(basis))
}

/// `∫|f₁ − f₂| d(ref)`: the variation norm, twice the probabilists' total variation.
pub fn tv_distance(m1: &GridMeasure, m2: &GridMeasure) -> Result<f64> {
    if m1.grid != m2.grid {
        return Err(Error::Measure("measures live on different grids".into()));
    }
    if m1.reference != m2.reference {
        return Err(Error::Measure("measures use different reference measures".into()));
    }
    let w = m1.grid.weights();
    Ok(m1
        .lebesgue_density()
        .iter()
        .zip(m2.lebesgue_density())
        .zip(w)
        .map(|((a, b), w)| (a - b).abs() * w)
        .sum())
}
