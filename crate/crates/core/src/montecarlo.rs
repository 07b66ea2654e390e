//! Path simulation of the subordinated killed diffusion `X_{S_t ∧ τ}`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::bernstein::BernsteinFunction;
use crate::conditional::GridMeasure;
use crate::error::{Error, Result};
use crate::semigroup::{log_survival, InitialDistribution, InitialKind};
use crate::spectral::{Potential, SpectralBasis};
use crate::transport::QuantileTable;

/// Reproducible random stream: path `id` draws the same numbers under any schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub id: u64,
}

impl RngStream {
    pub fn new(seed: u64, id: u64) -> Self {
        Self { seed, id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.id);
        r
    }
}

/// Positive `α`-stable draw with `E e^{-λ X} = e^{-dt λ^α}` (Kanter's representation).
///
/// `α = 1` is the degenerate case and returns `dt`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(dt > 0.0) {
        return Err(Error::Domain(format!("stable increment needs α ∈ (0,1], dt > 0; got α={alpha}, dt={dt}")));
    }
    if alpha == 1.0 {
        return Ok(dt);
    }
    let u = PI * rng.random::<f64>();
    let e: f64 = rng.sample(Exp1);
    let a = ((alpha * u).sin() / u.sin()).powf(1.0 / (1.0 - alpha)) * ((1.0 - alpha) * u).sin() / (alpha * u).sin();
    let s = (a / e).powf((1.0 - alpha) / alpha);
    Ok(dt.powf(1.0 / alpha) * s)
}

/// One increment of the subordinator over a time step `dt`.
pub fn sample_subordinator_increment<R: Rng + ?Sized>(b: &BernsteinFunction, dt: f64, rng: &mut R) -> Result<f64> {
    match *b {
        BernsteinFunction::Linear { c } => Ok(c * dt),
        BernsteinFunction::StableDrift { b, c, alpha } => {
            if alpha == 1.0 {
                Ok((b + c) * dt)
            } else {
                Ok(b * dt + sample_stable_increment(alpha, c * dt, rng)?)
            }
        }
        BernsteinFunction::CompoundPoissonDrift { b, r, theta } => {
            let count: f64 = Poisson::new(r * dt)
                .map_err(|e| Error::Simulation(e.to_string()))?
                .sample(rng);
            let jumps: f64 = (0..count as u64).map(|_| rng.sample::<f64, _>(Exp1) / theta).sum();
            Ok(b * dt + jumps)
        }
    }
}

/// `S` at each of the sorted `times` (with `S_0 = 0`).
pub fn sample_subordinator_path<R: Rng + ?Sized>(b: &BernsteinFunction, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Domain("subordinator times must be sorted and nonnegative".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut prev, mut s) = (0.0, 0.0);
    for &t in times {
        if t > prev {
            s += sample_subordinator_increment(b, t - prev, rng)?;
        }
        out.push(s);
        prev = t;
    }
    Ok(out)
}

/// Euler–Maruyama settings for the base diffusion `dX = U'(X) ds + √2 dW` on `[0, L]`.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    pub potential: Potential,
    pub length: f64,
    pub step: f64,
    /// Per-step Brownian-bridge crossing test.
    pub bridge: bool,
}

impl DiffusionSpec {
    pub fn new(potential: Potential, length: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1e-3 * length * length) {
            return Err(Error::Config(format!(
                "step {step} must lie in (0, 1e-3·L²] = (0, {}]",
                1e-3 * length * length
            )));
        }
        Ok(Self {
            potential,
            length,
            step,
            bridge: true,
        })
    }
}

/// Base path positions at requested times and its killing time.
#[derive(Debug, Clone)]
pub struct KilledPath {
    /// First boundary contact, `∞` if none before the horizon.
    pub tau: f64,
    /// Position at each requested time (`NaN` at or after `τ`).
    pub positions: Vec<f64>,
}

/// Simulate the killed diffusion from `x0` up to `horizon`, recording the
/// position at each of the sorted `record` times.
pub fn simulate_killed_path<R: Rng + ?Sized>(
    spec: &DiffusionSpec,
    x0: f64,
    horizon: f64,
    record: &[f64],
    rng: &mut R,
) -> Result<KilledPath> {
    let l = spec.length;
    if !(x0 > 0.0 && x0 < l) {
        return Err(Error::Domain(format!("starting point {x0} is not inside (0, {l})")));
    }
    let constant = spec.potential.is_constant();
    let mut positions = vec![f64::NAN; record.len()];
    let (mut x, mut s) = (x0, 0.0);
    let mut next = 0;
    while next < record.len() && record[next] <= 0.0 {
        positions[next] = x;
        next += 1;
    }
    while s < horizon {
        // Land exactly on the next record time when it falls inside the step.
        let target = record.get(next).copied().unwrap_or(f64::INFINITY).min(horizon);
        let dt = spec.step.min(target - s).max(0.0);
        let drift = if constant { 0.0 } else { spec.potential.gradient(x) };
        let z: f64 = rng.sample(StandardNormal);
        let y = x + drift * dt + (2.0 * dt).sqrt() * z;
        let killed = if y <= 0.0 || y >= l {
            true
        } else if spec.bridge {
            let p = (-(x * y) / dt).exp() + (-((l - x) * (l - y)) / dt).exp();
            rng.random::<f64>() < p
        } else {
            false
        };
        if killed {
            return Ok(KilledPath {
                tau: s + dt,
                positions,
            });
        }
        x = y;
        s += dt;
        while next < record.len() && record[next] <= s {
            positions[next] = x;
            next += 1;
        }
    }
    Ok(KilledPath {
        tau: f64::INFINITY,
        positions,
    })
}

/// One path of the subordinated process over the observation grid.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub obs_times: Vec<f64>,
    pub subordinator: Vec<f64>,
    pub positions: Vec<f64>,
    pub tau: f64,
    pub survived: bool,
}

/// `n` midpoints of `[0, t]`.
pub fn observation_grid(t: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * t / n as f64).collect()
}

pub fn simulate_subordinated_path<R: Rng + ?Sized>(
    spec: &DiffusionSpec,
    b: &BernsteinFunction,
    x0: f64,
    obs_times: &[f64],
    t: f64,
    rng: &mut R,
) -> Result<PathRecord> {
    let mut times = obs_times.to_vec();
    times.push(t);
    let mut sub = sample_subordinator_path(b, &times, rng)?;
    let s_t = sub.pop().unwrap();
    let base = simulate_killed_path(spec, x0, s_t, &sub, rng)?;
    Ok(PathRecord {
        obs_times: obs_times.to_vec(),
        survived: base.tau > s_t,
        subordinator: sub,
        positions: base.positions,
        tau: base.tau,
    })
}

/// Histogram over equal bins of `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `Σ_bins |mass − m(bin)|` against a grid measure on the same interval.
    pub fn tv_against(&self, m: &GridMeasure) -> Result<f64> {
        let q = QuantileTable::from_measure(m)?;
        Ok(self
            .edges
            .windows(2)
            .zip(&self.masses)
            .map(|(w, p)| (p - (q.cdf(w[1]) - q.cdf(w[0]))).abs())
            .sum())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("#schema=qsdlab/1\nbin_center,mass\n");
        for (c, m) in self.centers().iter().zip(&self.masses) {
            s.push_str(&format!("{c:.17e},{m:.17e}\n"));
        }
        s
    }
}

/// Settings for [`mc_conditional_empirical`].
#[derive(Debug, Clone)]
pub struct McSettings {
    pub n_paths: usize,
    pub bins: usize,
    pub seed: u64,
    pub obs_points: usize,
    pub step: f64,
    pub bridge: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            bins: 64,
            seed: 1,
            obs_points: 512,
            step: 1e-3,
            bridge: true,
        }
    }
}

pub const MIN_PATHS: usize = 10_000;
pub const MIN_SURVIVAL: f64 = 1e-3;
const CHUNK: usize = 1024;

/// Monte Carlo estimate of the conditional empirical measure.
#[derive(Debug, Clone)]
pub struct McConditional {
    pub histogram: Histogram,
    pub survival: f64,
    pub survival_se: f64,
    /// Spectral survival probability the run was checked against.
    pub expected_survival: f64,
    pub surviving_paths: usize,
    /// Surviving path-time samples entering the histogram.
    pub samples: usize,
    pub seed: u64,
    pub n_paths: usize,
}

impl McConditional {
    /// Sidecar metadata block.
    pub fn metadata(&self) -> String {
        format!(
            "seed={}\nn_paths={}\nsurviving_paths={}\nsamples={}\nsurvival={:.17e}\nsurvival_se={:.17e}\nsurvival_ci95=[{:.17e},{:.17e}]\nexpected_survival={:.17e}\n",
            self.seed,
            self.n_paths,
            self.surviving_paths,
            self.samples,
            self.survival,
            self.survival_se,
            self.survival - 1.96 * self.survival_se,
            self.survival + 1.96 * self.survival_se,
            self.expected_survival
        )
    }
}

enum Start {
    Point(f64),
    Law(QuantileTable),
}

impl Start {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Start::Point(x) => *x,
            Start::Law(q) => q.quantile(rng.random::<f64>()),
        }
    }
}

pub fn mc_conditional_empirical(
    basis: &SpectralBasis,
    potential: &Potential,
    b: &BernsteinFunction,
    nu: &InitialDistribution,
    t: f64,
    settings: &McSettings,
) -> Result<McConditional> {
    if basis.dim() != 1 {
        return Err(Error::Unsupported("path simulation is implemented on intervals only".into()));
    }
    if settings.n_paths < MIN_PATHS {
        return Err(Error::Simulation(format!(
            "{} paths requested, at least {MIN_PATHS} required",
            settings.n_paths
        )));
    }
    let expected = log_survival(basis, b, nu, t)?.exp();
    if expected < MIN_SURVIVAL {
        return Err(Error::Simulation(format!(
            "expected survival {expected:e} is below {MIN_SURVIVAL:e}; use the spectral pipeline for this t"
        )));
    }
    let length = basis.domain().lengths()[0];
    let mut spec = DiffusionSpec::new(potential.clone(), length, settings.step)?;
    spec.bridge = settings.bridge;
    let start = match nu.kind() {
        InitialKind::Dirac(x) => Start::Point(x[0]),
        InitialKind::Density(h) | InitialKind::Smoothed { density: h, .. } => {
            let leb: Vec<f64> = h.iter().zip(basis.u_values()).map(|(h, u)| h * u.exp()).collect();
            let w = basis.grid().weights();
            let s: f64 = leb.iter().zip(&w).map(|(a, b)| a * b).sum();
            let leb: Vec<f64> = leb.iter().map(|v| v / s).collect();
            Start::Law(QuantileTable::new(basis.grid().nodes(), &leb)?)
        }
    };
    let obs = observation_grid(t, settings.obs_points);
    let bins = settings.bins;
    let chunks = settings.n_paths.div_ceil(CHUNK);
    let partials: Vec<Result<(Vec<u64>, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; bins];
            let mut alive = 0;
            for id in c * CHUNK..((c + 1) * CHUNK).min(settings.n_paths) {
                let mut rng = RngStream::new(settings.seed, id as u64).rng();
                let x0 = start.draw(&mut rng);
                if !(x0 > 0.0 && x0 < length) {
                    continue;
                }
                let rec = simulate_subordinated_path(&spec, b, x0, &obs, t, &mut rng)?;
                if rec.survived {
                    alive += 1;
                    for x in &rec.positions {
                        let k = ((x / length) * bins as f64) as usize;
                        counts[k.min(bins - 1)] += 1;
                    }
                }
            }
            Ok((counts, alive))
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let mut alive = 0;
    for p in partials {
        let (c, a) = p?;
        counts.iter_mut().zip(&c).for_each(|(x, y)| *x += y);
        alive += a;
    }
    let samples: u64 = counts.iter().sum();
    if samples == 0 {
        return Err(Error::Simulation("no path survived".into()));
    }
    let n = settings.n_paths as f64;
    let survival = alive as f64 / n;
    Ok(McConditional {
        histogram: Histogram {
            edges: (0..=bins).map(|k| k as f64 * length / bins as f64).collect(),
            masses: counts.iter().map(|c| *c as f64 / samples as f64).collect(),
        },
        survival,
        survival_se: (survival * (1.0 - survival) / n).sqrt(),
        expected_survival: expected,
        surviving_paths: alive,
        samples: samples as usize,
        seed: settings.seed,
        n_paths: settings.n_paths,
    })
}

/// Monte Carlo estimate of `B(λ)` as `−(1/t) log Ê e^{-λ S_t}`, with its delta-method standard error.
pub fn laplace_exponent_estimate(b: &BernsteinFunction, t: f64, lambda: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    let draws: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64).rng();
            sample_subordinator_increment(b, t, &mut rng).map(|s| (-lambda * s).exp())
        })
        .collect::<Result<_>>()?;
    let (mean, se) = crate::stats::mean_and_se(&draws);
    Ok((-mean.ln() / t, se / (t * mean)))
}

/// Monte Carlo survival `P^{x0}(τ > s)` of the base diffusion with its standard error.
pub fn survival_estimate(spec: &DiffusionSpec, x0: f64, s: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    let alive: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64).rng();
            simulate_killed_path(spec, x0, s, &[], &mut rng).map(|p| if p.tau > s { 1.0 } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(crate::stats::mean_and_se(&alive))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| RngStream::new(7, 3).rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = RngStream::new(7, 3).rng().random();
        let y: u64 = RngStream::new(7, 4).rng().random();
        assert_ne!(x, y);
    }

    #[test]
    fn linear_subordinator_is_deterministic() {
        let b = BernsteinFunction::linear(1.0).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let s = sample_subordinator_path(&b, &[0.5, 1.0, 2.5], &mut rng).unwrap();
        assert_eq!(s, vec![0.5, 1.0, 2.5]);
    }

    #[test]
    fn stable_draws_positive() {
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..10_000 {
            assert!(sample_stable_increment(0.5, 1.0, &mut rng).unwrap() > 0.0);
        }
        assert_eq!(sample_stable_increment(1.0, 0.3, &mut rng).unwrap(), 0.3);
    }

    #[test]
    fn boundary_start_rejected() {
        let spec = DiffusionSpec::new(Potential::constant(), PI, 1e-3).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        assert!(simulate_killed_path(&spec, 0.0, 1.0, &[], &mut rng).is_err());
        assert!(DiffusionSpec::new(Potential::constant(), PI, 0.1).is_err());
    }
}
