use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

use super::{Domain, Grid};

/// How a basis was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    ClosedForm,
    FiniteDifference,
    Tensor,
}

impl BasisKind {
    pub(crate) fn tag(self) -> &'static str {
        match self {
            BasisKind::ClosedForm => "closed-form",
            BasisKind::FiniteDifference => "finite-difference",
            BasisKind::Tensor => "tensor",
        }
    }

    pub(crate) fn from_tag(s: &str) -> Option<Self> {
        match s {
            "closed-form" => Some(BasisKind::ClosedForm),
            "finite-difference" => Some(BasisKind::FiniteDifference),
            "tensor" => Some(BasisKind::Tensor),
            _ => None,
        }
    }
}

/// Truncated Dirichlet eigensystem sampled on a grid.
///
/// `values[k][i]` is `φ_k` at node `i`, normalized in `L²(μ)`; `ratios[k][i]`
/// is `φ_k/φ_0`, extended to boundary nodes by continuity. `mu_weights[i]`
/// integrates against `μ = e^U dx`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub(crate) domain: Domain,
    pub(crate) grid: Grid,
    pub(crate) kind: BasisKind,
    pub(crate) potential: String,
    pub(crate) u_values: Vec<f64>,
    pub(crate) lambdas: Vec<f64>,
    pub(crate) values: Vec<Vec<f64>>,
    pub(crate) ratios: Vec<Vec<f64>>,
    pub(crate) mu_weights: Vec<f64>,
    pub(crate) mu_coeffs: Vec<f64>,
}

impl SpectralBasis {
    pub(crate) fn assemble(
        domain: Domain,
        grid: Grid,
        kind: BasisKind,
        potential: String,
        u_values: Vec<f64>,
        lambdas: Vec<f64>,
        values: Vec<Vec<f64>>,
        ratios: Vec<Vec<f64>>,
    ) -> Self {
        let mu_weights: Vec<f64> = grid
            .weights()
            .iter()
            .zip(&u_values)
            .map(|(w, u)| w * u.exp())
            .collect();
        let mu_coeffs = match (kind, &domain) {
            // Exact μ(φ_m) = √2 (1 − (−1)^{m+1}) / ((m+1)π).
            (BasisKind::ClosedForm, Domain::Interval { .. }) => (0..values.len())
                .map(|m| if m % 2 == 0 { 2.0 * SQRT_2 / ((m + 1) as f64 * PI) } else { 0.0 })
                .collect(),
            _ => values
                .iter()
                .map(|phi| phi.iter().zip(&mu_weights).map(|(p, w)| p * w).sum())
                .collect(),
        };
        Self {
            domain,
            grid,
            kind,
            potential,
            u_values,
            lambdas,
            values,
            ratios,
            mu_weights,
            mu_coeffs,
        }
    }

    /// Number of retained modes `K`.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn potential_label(&self) -> &str {
        &self.potential
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn phi(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// `φ_k φ_0⁻¹` on the grid.
    pub fn ratio(&self, k: usize) -> &[f64] {
        &self.ratios[k]
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.mu_weights
    }

    /// Quadrature weights for `μ₀ = φ₀² μ`.
    pub fn mu0_weights(&self) -> Vec<f64> {
        self.mu_weights
            .iter()
            .zip(&self.values[0])
            .map(|(w, p)| w * p * p)
            .collect()
    }

    /// `μ(φ_m)` for every retained mode.
    pub fn mu_coeffs(&self) -> &[f64] {
        &self.mu_coeffs
    }

    /// `∫ f dμ`.
    pub fn integrate_mu(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mu_weights).map(|(a, w)| a * w).sum()
    }

    /// Coefficients `μ(φ_m f)`.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        self.values
            .iter()
            .map(|phi| {
                phi.iter()
                    .zip(f)
                    .zip(&self.mu_weights)
                    .map(|((p, v), w)| p * v * w)
                    .sum()
            })
            .collect()
    }

    /// `Σ c_m φ_m` on the grid (first `coeffs.len()` modes).
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        combine(&self.values, coeffs, self.grid.len())
    }

    /// `Σ c_m φ_m φ_0⁻¹` on the grid.
    pub fn synthesize_ratio(&self, coeffs: &[f64]) -> Vec<f64> {
        combine(&self.ratios, coeffs, self.grid.len())
    }

    /// Coefficients `μ₀(f φ_m φ_0⁻¹)` of a grid function in the ground-state basis.
    pub fn project_ground(&self, f: &[f64]) -> Vec<f64> {
        // φ_m φ_0⁻¹ · φ_0² = φ_m φ_0, so these are μ(f φ_m φ_0).
        let w: Vec<f64> = f
            .iter()
            .zip(&self.values[0])
            .zip(&self.mu_weights)
            .map(|((v, p0), w)| v * p0 * w)
            .collect();
        self.values
            .iter()
            .map(|phi| phi.iter().zip(&w).map(|(p, x)| p * x).sum())
            .collect()
    }

    /// `max_{j,k} |∫φ_jφ_k dμ − δ_{jk}|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            let wa: Vec<f64> = self.values[a].iter().zip(&self.mu_weights).map(|(p, w)| p * w).collect();
            for b in a..k {
                let dot: f64 = wa.iter().zip(&self.values[b]).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest absolute value any mode takes on a boundary node.
    pub fn boundary_max(&self) -> f64 {
        let boundary: Vec<usize> = (0..self.grid.len()).filter(|i| self.grid.is_boundary(*i)).collect();
        self.values
            .iter()
            .flat_map(|phi| boundary.iter().map(move |i| phi[*i].abs()))
            .fold(0.0, f64::max)
    }

    /// Smallest `α₀ ≥ 1` with `α₀⁻¹ k^{2/d} ≤ λ_k − λ_0 ≤ α₀ k^{2/d}` on the retained modes.
    pub fn weyl_constant(&self) -> f64 {
        let e = 2.0 / self.dim() as f64;
        let l0 = self.lambdas[0];
        self.lambdas
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, l)| {
                let r = (l - l0) / (k as f64).powf(e);
                r.max(1.0 / r)
            })
            .fold(1.0, f64::max)
    }

    /// Least-squares slope of `log(λ_k − λ_0)` against `log k` over `k ≥ from`.
    pub fn weyl_exponent_fit(&self, from: usize) -> f64 {
        let l0 = self.lambdas[0];
        let pts: Vec<(f64, f64)> = self
            .lambdas
            .iter()
            .enumerate()
            .skip(from.max(1))
            .filter(|(_, l)| **l > l0)
            .map(|(k, l)| ((k as f64).ln(), (l - l0).ln()))
            .collect();
        crate::stats::linear_fit(&pts).slope
    }

    /// Sup-norm of each mode over the grid.
    pub fn sup_norms(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.iter().fold(0.0_f64, |a, b| a.max(b.abs()))).collect()
    }

    /// Sup-norm of each `φ_k φ_0⁻¹` over the grid.
    pub fn ratio_sup_norms(&self) -> Vec<f64> {
        self.ratios.iter().map(|p| p.iter().fold(0.0_f64, |a, b| a.max(b.abs()))).collect()
    }

    /// `‖φ₀⁻¹‖_{L^p(μ₀)}` by interior quadrature.
    pub fn inverse_ground_norm(&self, p: f64) -> f64 {
        let s: f64 = self
            .values[0]
            .iter()
            .zip(&self.mu_weights)
            .filter(|(p0, _)| **p0 > 0.0)
            .map(|(p0, w)| p0.powf(2.0 - p) * w)
            .sum();
        s.powf(1.0 / p)
    }

    /// Keep only the first `k` modes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::Config(format!("cannot truncate {} modes to {k}", self.len())));
        }
        let mut out = self.clone();
        out.lambdas.truncate(k);
        out.values.truncate(k);
        out.ratios.truncate(k);
        out.mu_coeffs.truncate(k);
        Ok(out)
    }
}

pub(crate) fn combine(rows: &[Vec<f64>], coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (row, c) in rows.iter().zip(coeffs) {
        if *c == 0.0 {
            continue;
        }
        out.iter_mut().zip(row).for_each(|(o, v)| *o += c * v);
    }
    out
}
