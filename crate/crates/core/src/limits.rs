//! Limit constants of `t² W₂(μ_t, μ₀)²`, finiteness classification and rate fits.

use crate::bernstein::{check_class_alpha, default_probe, exponents, exponents_from_lambdas, BernsteinFunction};
use crate::error::{Error, Result};
use crate::semigroup::InitialDistribution;
use crate::spectral::{tensor_spectrum, SpectralBasis};
use crate::stats::linear_fit;

/// Outcome of summing a limit series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    ConvergentValue { value: f64, tail: f64 },
    DivergenceIndicated,
}

/// `(1/(μ(φ₀)ν(φ₀))²) Σ_{m≥1} [μ(φ₀)ν(φ_m) + ν(φ₀)μ(φ_m)]² / ((λ_m−λ₀) D_m²)`.
#[derive(Debug, Clone)]
pub struct LimitSeries {
    /// Raw terms (entry 0 is zero).
    pub terms: Vec<f64>,
    pub prefactor: f64,
    /// Prefactor-scaled partial sums `S_K`, `K = 1..len`.
    pub partial_sums: Vec<f64>,
    pub tail_bound: f64,
    pub verdict: Verdict,
    /// Fitted constants used by the tail bound: Weyl `α₀`, envelope `(a, b)`, growth `C`.
    pub weyl: f64,
    pub envelope: (f64, f64),
    pub growth: f64,
}

impl LimitSeries {
    /// Truncated value.
    pub fn value(&self) -> f64 {
        *self.partial_sums.last().unwrap()
    }

    /// Upper constant `I = 4 × value`.
    pub fn upper_constant(&self) -> f64 {
        4.0 * self.value()
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self.verdict, Verdict::ConvergentValue { .. })
    }
}

/// Growth ratio of successive dyadic block increments beyond which divergence is indicated.
pub const DIVERGENCE_RATIO: f64 = 0.8;

pub fn limit_precise(basis: &SpectralBasis, b: &BernsteinFunction, nu: &InitialDistribution, k: usize) -> Result<LimitSeries> {
    let k = k.min(basis.len()).min(nu.coeffs().len());
    if k < 2 {
        return Err(Error::Config("limit series needs at least two modes".into()));
    }
    let nv = nu.coeffs();
    if !(nv[0] > 0.0) {
        return Err(Error::Measure(format!("ν(φ₀) = {} must be positive", nv[0])));
    }
    let mu = basis.mu_coeffs();
    let l = basis.lambdas();
    let d = exponents(b, basis).gaps;
    let prefactor = 1.0 / (mu[0] * nv[0]).powi(2);
    let mut terms = vec![0.0; k];
    let mut growth: f64 = 0.0;
    for m in 1..k {
        let c = mu[0] * nv[m] + nv[0] * mu[m];
        terms[m] = c * c / ((l[m] - l[0]) * d[m] * d[m]);
        growth = growth.max(c.abs() / (m as f64).sqrt());
    }
    let mut partial_sums = Vec::with_capacity(k);
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(prefactor * acc);
    }

    let dim = basis.dim() as f64;
    let alpha = b.declared_alpha();
    let weyl = basis.truncated(k)?.weyl_constant();
    let class = check_class_alpha(b, alpha, &default_probe())?;
    let (a, shortfall) = class.envelope;
    let b_shift = shortfall + b.value(l[0]);
    let q = 2.0 * (1.0 + 2.0 * alpha) / dim - 1.0;
    let x_k = a * weyl.powf(-alpha) * (k as f64).powf(2.0 * alpha / dim);
    let tail_bound = if q > 1.0 && x_k > b_shift && k > 1 {
        let c_prime = growth * growth * weyl.powf(1.0 + 2.0 * alpha) / (a * a * (1.0 - b_shift / x_k).powi(2));
        prefactor * c_prime * ((k - 1) as f64).powf(1.0 - q) / (q - 1.0)
    } else {
        f64::INFINITY
    };
    let verdict = if tail_bound.is_finite() || !divergence_signature(&partial_sums) {
        Verdict::ConvergentValue {
            value: prefactor * acc,
            tail: tail_bound,
        }
    } else {
        Verdict::DivergenceIndicated
    };
    Ok(LimitSeries {
        terms,
        prefactor,
        partial_sums,
        tail_bound,
        verdict,
        weyl,
        envelope: (a, shortfall),
        growth,
    })
}

/// Increments of partial sums over dyadic blocks `(2^{j−1}, 2^j]`, ending at the largest power of two.
pub fn dyadic_increments(partial_sums: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut hi = 2;
    while hi <= partial_sums.len() {
        out.push((hi, partial_sums[hi - 1] - partial_sums[hi / 2 - 1]));
        hi *= 2;
    }
    out
}

/// Whether the last three dyadic block increments fail to decay geometrically.
pub fn divergence_signature(partial_sums: &[f64]) -> bool {
    let inc = dyadic_increments(partial_sums);
    if inc.len() < 4 {
        return false;
    }
    inc[inc.len() - 4..]
        .windows(2)
        .all(|w| w[0].1 > 0.0 && w[1].1 / w[0].1 >= DIVERGENCE_RATIO)
}

/// Which finiteness case of the upper constant applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinitenessCase {
    /// `d < 2(1 + 2α)`.
    Case1,
    /// `h ∈ L^p(μ)` with `p > 2d/(d + 2 + 4α)`.
    Case2a,
    /// `h φ₀⁻¹ ∈ L^q(μ₀)` with `q > 2(d + 2)/(d + 4 + 4α)`.
    Case2b,
    Unknown,
}

/// Integrability known about the initial density `h`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NuMeta {
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinitenessVerdict {
    pub case: FinitenessCase,
    pub dimension_bound: f64,
    pub p_threshold: f64,
    pub q_threshold: f64,
    /// Integrability exponent `p₀` required by the precise limit.
    pub p0: f64,
}

pub fn finiteness_classify(d: usize, alpha: f64, meta: NuMeta) -> Result<FinitenessVerdict> {
    if d == 0 || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("need d ≥ 1 and α ∈ (0, 1], got d={d}, α={alpha}")));
    }
    let df = d as f64;
    let dimension_bound = 2.0 * (1.0 + 2.0 * alpha);
    let p_threshold = 2.0 * df / (df + 2.0 + 4.0 * alpha);
    let q_threshold = 2.0 * (df + 2.0) / (df + 4.0 + 4.0 * alpha);
    let case = if df < dimension_bound {
        FinitenessCase::Case1
    } else if meta.p.is_some_and(|p| p > p_threshold) {
        FinitenessCase::Case2a
    } else if meta.q.is_some_and(|q| q > q_threshold) {
        FinitenessCase::Case2b
    } else {
        FinitenessCase::Unknown
    };
    Ok(FinitenessVerdict {
        case,
        dimension_bound,
        p_threshold,
        q_threshold,
        p0: precise_limit_p0(d, alpha),
    })
}

/// `p₀ = max(6(d+2)/(d+2+12α), 3/2)`.
pub fn precise_limit_p0(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    (6.0 * (df + 2.0) / (df + 2.0 + 12.0 * alpha)).max(1.5)
}

/// Growth of the eigenvalue series `Σ 1/((λ_k−λ₀)(B(λ_k)−B(λ₀))²)` on the cube `[0, π]^d`
/// and of its majorant `Σ k^{-2(1+2α)/d}`.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub d: usize,
    pub alpha: f64,
    /// `2(1 + 2α)/d`.
    pub exponent: f64,
    pub spectral_sums: Vec<f64>,
    pub zeta_sums: Vec<f64>,
    pub spectral_increments: Vec<(usize, f64)>,
    pub zeta_increments: Vec<(usize, f64)>,
    pub divergence_indicated: bool,
}

impl DivergenceReport {
    /// Ratios of the last three successive spectral block increments.
    pub fn increment_ratios(&self) -> Vec<f64> {
        let inc = &self.spectral_increments;
        inc[inc.len().saturating_sub(4)..].windows(2).map(|w| w[1].1 / w[0].1).collect()
    }
}

pub fn divergence_probe(d: usize, alpha: f64, k: usize) -> Result<DivergenceReport> {
    let b = BernsteinFunction::stable(alpha)?;
    // Interval factor eigenvalues (j+1)²; enough per axis to cover the K-th tensor mode.
    let per_axis = ((k as f64).powf(1.0 / d as f64) * 2.0).ceil() as usize + 8;
    let factor: Vec<f64> = (0..per_axis).map(|j| ((j + 1) * (j + 1)) as f64).collect();
    let factors: Vec<&[f64]> = (0..d).map(|_| factor.as_slice()).collect();
    let modes = tensor_spectrum(&factors, k)?;
    let lambdas: Vec<f64> = modes.iter().map(|m| m.lambda).collect();
    let gaps = exponents_from_lambdas(&b, &lambdas).gaps;
    let exponent = 2.0 * (1.0 + 2.0 * alpha) / d as f64;
    let mut spectral_sums = vec![0.0];
    let mut zeta_sums = vec![0.0];
    for m in 1..k {
        let dl = lambdas[m] - lambdas[0];
        let term = if dl > 0.0 { 1.0 / (dl * gaps[m] * gaps[m]) } else { 0.0 };
        spectral_sums.push(spectral_sums[m - 1] + term);
        zeta_sums.push(zeta_sums[m - 1] + (m as f64).powf(-exponent));
    }
    let spectral_increments = dyadic_increments(&spectral_sums);
    let zeta_increments = dyadic_increments(&zeta_sums);
    Ok(DivergenceReport {
        d,
        alpha,
        exponent,
        divergence_indicated: divergence_signature(&spectral_sums),
        spectral_sums,
        zeta_sums,
        spectral_increments,
        zeta_increments,
    })
}

/// Extrapolated limit of a sequence `v(t)` on a geometric `t` grid.
#[derive(Debug, Clone)]
pub struct RateFit {
    /// Richardson extrapolation from the last two points under `v = c + a/t`.
    pub limit: f64,
    /// Slope of `log |v − limit|` against `log t`.
    pub slope: f64,
    pub r_squared: f64,
    pub reliable: bool,
    pub note: Option<String>,
}

pub fn rate_fit(ts: &[f64], values: &[f64]) -> Result<RateFit> {
    if ts.len() != values.len() || ts.len() < 4 {
        return Err(Error::Config("rate fit needs at least 4 (t, value) pairs".into()));
    }
    let n = ts.len();
    let ratio = ts[1] / ts[0];
    if ts.windows(2).any(|w| !(w[1] > w[0]) || ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6) {
        return Err(Error::Config("rate fit needs a geometric t grid".into()));
    }
    let (t1, t2) = (ts[n - 2], ts[n - 1]);
    let limit = (t2 * values[n - 1] - t1 * values[n - 2]) / (t2 - t1);
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(values)
        .filter(|(_, v)| (*v - limit).abs() > 1e-14 * limit.abs().max(1e-300))
        .map(|(t, v)| (t.ln(), (v - limit).abs().ln()))
        .collect();
    let mut notes = Vec::new();
    let (slope, r_squared) = if pts.len() >= 2 {
        let f = linear_fit(&pts);
        (f.slope, f.r_squared)
    } else {
        notes.push("zero residuals: slope undefined".to_string());
        (f64::NAN, f64::NAN)
    };
    let tail = &values[n - 3..];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]) || tail.windows(2).all(|w| w[1] <= w[0]);
    if !monotone {
        notes.push("non-monotone tail".to_string());
    }
    Ok(RateFit {
        limit,
        slope,
        r_squared,
        reliable: notes.is_empty(),
        note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    })
}
