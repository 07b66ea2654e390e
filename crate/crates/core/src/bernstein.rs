//! Bernstein functions and the spectral exponents they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

/// Laplace exponent of a subordinator, `E e^{-λ S_t} = e^{-t B(λ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BernsteinFunction {
    /// `B(λ) = cλ`.
    Linear { c: f64 },
    /// `B(λ) = bλ + cλ^α`.
    StableDrift { b: f64, c: f64, alpha: f64 },
    /// `B(λ) = bλ + rλ/(λ+θ)`: drift plus compound Poisson with `Exp(θ)` jumps.
    CompoundPoissonDrift { b: f64, r: f64, theta: f64 },
}

impl BernsteinFunction {
    pub fn linear(c: f64) -> Result<Self> {
        Self::Linear { c }.validated()
    }

    pub fn stable_drift(b: f64, c: f64, alpha: f64) -> Result<Self> {
        Self::StableDrift { b, c, alpha }.validated()
    }

    /// Pure stable exponent `λ^α`.
    pub fn stable(alpha: f64) -> Result<Self> {
        Self::stable_drift(0.0, 1.0, alpha)
    }

    pub fn compound_poisson_drift(b: f64, r: f64, theta: f64) -> Result<Self> {
        Self::CompoundPoissonDrift { b, r, theta }.validated()
    }

    /// Checks parameter ranges, returning `self` unchanged when valid.
    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Linear { c } => c > 0.0 && c.is_finite(),
            Self::StableDrift { b, c, alpha } => {
                b >= 0.0 && b.is_finite() && c > 0.0 && c.is_finite() && alpha > 0.0 && alpha <= 1.0
            }
            Self::CompoundPoissonDrift { b, r, theta } => {
                b > 0.0 && r > 0.0 && theta > 0.0 && b.is_finite() && r.is_finite() && theta.is_finite()
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Config(format!("invalid Bernstein parameters: {self:?}")))
        }
    }

    /// `B(λ)`; errors on negative or non-finite input.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!("B(λ) needs λ ≥ 0, got {lambda}")));
        }
        Ok(self.value(lambda))
    }

    pub(crate) fn value(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        match *self {
            Self::Linear { c } => c * lambda,
            Self::StableDrift { b, c, alpha } => b * lambda + c * lambda.powf(alpha),
            Self::CompoundPoissonDrift { b, r, theta } => b * lambda + r * lambda / (lambda + theta),
        }
    }

    /// `B'(0⁺)`, possibly infinite.
    pub fn derivative_at_zero(&self) -> f64 {
        match *self {
            Self::Linear { c } => c,
            Self::StableDrift { b, c, alpha } => {
                if alpha < 1.0 {
                    f64::INFINITY
                } else {
                    b + c
                }
            }
            Self::CompoundPoissonDrift { b, r, theta } => b + r / theta,
        }
    }

    /// Declared class exponent: the stable index, or 1 for the other kinds.
    pub fn declared_alpha(&self) -> f64 {
        match *self {
            Self::StableDrift { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(*self, Self::Linear { c } if c == 1.0)
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Linear { c } => format!("linear(c={c})"),
            Self::StableDrift { b, c, alpha } => format!("stable-drift(b={b},c={c},alpha={alpha})"),
            Self::CompoundPoissonDrift { b, r, theta } => {
                format!("compound-poisson-drift(b={b},r={r},theta={theta})")
            }
        }
    }
}

/// `D_m = B(λ_m) − B(λ_0)` together with `B(λ_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExponents {
    pub gaps: Vec<f64>,
    pub b_lambda0: f64,
}

impl SpectralExponents {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Spectral gap `D_1`.
    pub fn gap(&self) -> f64 {
        self.gaps.get(1).copied().unwrap_or(f64::INFINITY)
    }
}

pub fn exponents(b: &BernsteinFunction, basis: &SpectralBasis) -> SpectralExponents {
    exponents_from_lambdas(b, basis.lambdas())
}

pub fn exponents_from_lambdas(b: &BernsteinFunction, lambdas: &[f64]) -> SpectralExponents {
    let b0 = b.value(lambdas[0]);
    let gaps = lambdas.iter().map(|l| (b.value(*l) - b0).max(0.0)).collect();
    SpectralExponents { gaps, b_lambda0: b0 }
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, z) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (z - a) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

/// Probe grid used when none is given: 200 points over `[10², 10⁸]`.
pub fn default_probe() -> Vec<f64> {
    log_grid(1e2, 1e8, 200)
}

pub const MIN_PROBE_POINTS: usize = 50;
const SLOPE_TOLERANCE: f64 = -0.02;

/// Outcome of a class-`α` membership check on a finite grid.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub alpha: f64,
    pub passed: bool,
    /// `min λ^{-α} B(λ)` over the grid.
    pub inf_value: f64,
    /// Log-slope of `λ^{-α} B(λ)` over the last decade of the grid.
    pub terminal_slope: f64,
    /// `(a, b)` with `B(r) ≥ a r^α − b` on the grid and below it.
    pub envelope: (f64, f64),
    pub grid: (f64, f64, usize),
}

pub fn check_class_alpha(b: &BernsteinFunction, alpha: f64, probe: &[f64]) -> Result<ClassReport> {
    if probe.is_empty() {
        return Err(Error::Config("empty probe grid".into()));
    }
    if probe.len() < MIN_PROBE_POINTS {
        return Err(Error::Config(format!(
            "probe grid has {} points, need at least {MIN_PROBE_POINTS}",
            probe.len()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("class exponent {alpha} outside (0, 1]")));
    }
    let scaled: Vec<f64> = probe.iter().map(|r| b.value(*r) / r.powf(alpha)).collect();
    let inf_value = scaled.iter().copied().fold(f64::INFINITY, f64::min);

    let last = *probe.last().unwrap();
    let start = probe.iter().position(|r| *r >= last / 10.0).unwrap_or(0);
    let tail: Vec<(f64, f64)> = probe[start..]
        .iter()
        .zip(&scaled[start..])
        .map(|(r, s)| (r.ln(), s.ln()))
        .collect();
    let terminal_slope = crate::stats::linear_fit(&tail).slope;
    let passed = inf_value > 0.0 && terminal_slope >= SLOPE_TOLERANCE;

    let half = probe.len() / 2;
    let a = 0.5 * scaled[half..].iter().copied().fold(f64::INFINITY, f64::min);
    let below = log_grid(1e-6 * probe[0], probe[0], 64);
    let shortfall = below
        .iter()
        .chain(probe)
        .map(|r| a * r.powf(alpha) - b.value(*r))
        .fold(0.0, f64::max);

    Ok(ClassReport {
        alpha,
        passed,
        inf_value,
        terminal_slope,
        envelope: (a, shortfall),
        grid: (probe[0], last, probe.len()),
    })
}

/// Largest `α ∈ {0.1, …, 1.0}` passing the class check on `probe`.
pub fn largest_class_alpha(b: &BernsteinFunction, probe: &[f64]) -> Result<Option<f64>> {
    let mut best = None;
    for i in 1..=10 {
        let alpha = i as f64 / 10.0;
        if check_class_alpha(b, alpha, probe)?.passed {
            best = Some(alpha);
        }
    }
    Ok(best)
}

/// Deviation of `B(r − λ₀)/(B(r) − B(λ₀))` from 1 along a probe tail.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub deviations: Vec<(f64, f64)>,
    pub final_deviation: f64,
    pub decreasing: bool,
}

pub fn ratio_limit_check(b: &BernsteinFunction, lambda0: f64, probe: &[f64]) -> Result<RatioReport> {
    if probe.is_empty() {
        return Err(Error::Config("empty probe grid".into()));
    }
    if probe[0] <= 10.0 * lambda0 {
        return Err(Error::Config(format!(
            "probe must start above 10·λ₀ = {}",
            10.0 * lambda0
        )));
    }
    let b0 = b.value(lambda0);
    let deviations: Vec<(f64, f64)> = probe
        .iter()
        .map(|r| (*r, (b.value(r - lambda0) / (b.value(*r) - b0) - 1.0).abs()))
        .collect();
    let decreasing = deviations.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15);
    Ok(RatioReport {
        final_deviation: deviations.last().unwrap().1,
        deviations,
        decreasing,
    })
}
