//! Experiment configuration (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinFunction;
use crate::error::{Error, Result};
use crate::limits::NuMeta;
use crate::semigroup::InitialDistribution;
use crate::spectral::{
    build_grid, eigensystem_closed_form, eigensystem_fd, read_basis, tensor_basis, Domain, Potential, SpectralBasis,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { length: f64 },
    Box { lengths: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant,
    Linear { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMethod {
    ClosedForm,
    FiniteDifference,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_kcross")]
    pub kcross: usize,
    #[serde(default = "default_method")]
    pub method: BasisMethod,
    /// Basis file for `method = "file"`.
    pub path: Option<PathBuf>,
    /// Modes per factor when building a box basis.
    pub factor_modes: Option<usize>,
}

fn default_k() -> usize {
    256
}
fn default_kcross() -> usize {
    crate::conditional::DEFAULT_KCROSS
}
fn default_method() -> BasisMethod {
    BasisMethod::ClosedForm
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            k: default_k(),
            kcross: default_kcross(),
            method: default_method(),
            path: None,
            factor_modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `ν = μ₀`.
    GroundState,
    /// `ν = μ`.
    Reference,
    Dirac { x0: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub t: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_obs")]
    pub obs_points: usize,
    #[serde(default = "default_true")]
    pub bridge: bool,
}

fn default_paths() -> usize {
    200_000
}
fn default_seed() -> u64 {
    1
}
fn default_bins() -> usize {
    64
}
fn default_step() -> f64 {
    1e-3
}
fn default_obs() -> usize {
    512
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportMethod {
    Quantile,
    Discrete,
}

/// Which end-to-end assertions a run makes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    #[serde(default = "default_true")]
    pub precise_limit: bool,
    #[serde(default = "default_true")]
    pub upper_bound: bool,
    #[serde(default)]
    pub tv_decay: bool,
}

impl Default for Assertions {
    fn default() -> Self {
        Self {
            precise_limit: true,
            upper_bound: true,
            tv_decay: false,
        }
    }
}

/// Numeric tolerances; defaults are the acceptance values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub limit_ratio_low: f64,
    pub limit_ratio_high: f64,
    pub upper_slack: f64,
    pub upper_from_t: f64,
    pub tv_final: f64,
    pub mc_tv: f64,
    pub mc_sigmas: f64,
    pub zero_mean: f64,
    pub orthonormality_closed_form: f64,
    pub orthonormality_fd: f64,
    pub semigroup_law: f64,
    pub clamp_warn: f64,
    pub clamp_fail: f64,
    pub transport_marginals: f64,
    pub slackness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            limit_ratio_low: 0.9,
            limit_ratio_high: 1.1,
            upper_slack: 0.05,
            upper_from_t: 10.0,
            tv_final: 0.01,
            mc_tv: 0.05,
            mc_sigmas: 3.0,
            zero_mean: 1e-8,
            orthonormality_closed_form: 1e-8,
            orthonormality_fd: 1e-5,
            semigroup_law: 1e-10,
            clamp_warn: 1e-4,
            clamp_fail: 1e-2,
            transport_marginals: 1e-9,
            slackness: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub basis: BasisSpec,
    pub bernstein: BernsteinFunction,
    /// Class exponent override used for finiteness and regularization.
    pub alpha: Option<f64>,
    pub initial: InitialSpec,
    /// Known integrability of the initial density (`h ∈ L^p(μ)`, `hφ₀⁻¹ ∈ L^q(μ₀)`).
    pub initial_p: Option<f64>,
    pub initial_q: Option<f64>,
    pub times: Vec<f64>,
    pub beta: Option<f64>,
    #[serde(default = "default_transport")]
    pub transport: TransportMethod,
    pub monte_carlo: Option<MonteCarloSpec>,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::Constant
}
fn default_n() -> usize {
    4097
}
fn default_transport() -> TransportMethod {
    TransportMethod::Quantile
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Parse and validate a config file; relative basis paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let (Some(p), Some(dir)) = (cfg.basis.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The headline configuration: `[0, π]`, `B(λ) = λ^{1/2}`, `ν = μ₀`.
    pub fn headline() -> Self {
        Self {
            domain: DomainSpec::Interval {
                length: std::f64::consts::PI,
            },
            potential: PotentialSpec::Constant,
            n: default_n(),
            basis: BasisSpec::default(),
            bernstein: BernsteinFunction::StableDrift {
                b: 0.0,
                c: 1.0,
                alpha: 0.5,
            },
            alpha: None,
            initial: InitialSpec::GroundState,
            initial_p: None,
            initial_q: None,
            times: vec![5.0, 10.0, 20.0, 40.0],
            beta: None,
            transport: TransportMethod::Quantile,
            monte_carlo: None,
            assertions: Assertions {
                tv_decay: true,
                ..Assertions::default()
            },
            tolerances: Tolerances::default(),
            output: default_output(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.domain {
            DomainSpec::Interval { length } if !(*length > 0.0) => {
                return Err(Error::Config(format!("interval length {length} must be positive")))
            }
            DomainSpec::Box { lengths } if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) => {
                return Err(Error::Config("box lengths must be positive and non-empty".into()))
            }
            _ => {}
        }
        self.bernstein.validated()?;
        if self.basis.k == 0 || self.basis.k > 4096 {
            return Err(Error::Config(format!("K = {} outside 1..=4096", self.basis.k)));
        }
        if self.basis.kcross > self.basis.k {
            return Err(Error::Config("kcross exceeds K".into()));
        }
        if self.basis.method == BasisMethod::File {
            match &self.basis.path {
                Some(p) if p.exists() => {}
                Some(p) => {
                    return Err(Error::Load {
                        path: p.clone(),
                        message: "basis file does not exist".into(),
                    })
                }
                None => return Err(Error::Config("basis method `file` needs `path`".into())),
            }
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("times must be positive and non-empty".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("times must be strictly increasing".into()));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("alpha {a} outside (0, 1]")));
            }
        }
        if let Some(mc) = &self.monte_carlo {
            if !(mc.t > 0.0) || mc.bins == 0 || mc.obs_points == 0 {
                return Err(Error::Config("monte_carlo needs t > 0, bins > 0, obs_points > 0".into()));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.bernstein.declared_alpha())
    }

    pub fn domain(&self) -> Result<Domain> {
        match &self.domain {
            DomainSpec::Interval { length } => Domain::interval(*length),
            DomainSpec::Box { lengths } => Domain::cube(lengths.clone()),
        }
    }

    pub fn potential(&self) -> Potential {
        match self.potential {
            PotentialSpec::Constant => Potential::constant(),
            PotentialSpec::Linear { slope } => Potential::linear(slope),
        }
    }

    pub fn build_basis(&self) -> Result<SpectralBasis> {
        let domain = self.domain()?;
        let k = self.basis.k;
        match (&self.domain, self.basis.method) {
            (_, BasisMethod::File) => {
                let b = read_basis(self.basis.path.as_ref().unwrap())?;
                if b.len() < k {
                    return Err(Error::Config(format!("basis file has {} modes, K = {k} requested", b.len())));
                }
                b.truncated(k)
            }
            (DomainSpec::Interval { length }, method) => {
                let grid = build_grid(&domain, self.n)?;
                match (method, &self.potential) {
                    (BasisMethod::ClosedForm, PotentialSpec::Constant) => eigensystem_closed_form(*length, k, &grid),
                    (BasisMethod::ClosedForm, _) => Err(Error::Config(
                        "closed-form basis needs a constant potential; use finite-difference".into(),
                    )),
                    _ => eigensystem_fd(&self.potential(), &grid, k),
                }
            }
            (DomainSpec::Box { lengths }, method) => {
                if method != BasisMethod::ClosedForm || self.potential != PotentialSpec::Constant {
                    return Err(Error::Unsupported("box bases are tensor products of closed-form factors".into()));
                }
                let per = self.basis.factor_modes.unwrap_or(64).min(self.n / 4).max(1);
                let factors = lengths
                    .iter()
                    .map(|l| {
                        let g = build_grid(&Domain::interval(*l)?, self.n)?;
                        eigensystem_closed_form(*l, per, &g)
                    })
                    .collect::<Result<Vec<_>>>()?;
                tensor_basis(&factors, k)
            }
        }
    }

    pub fn initial(&self, basis: &SpectralBasis) -> Result<InitialDistribution> {
        match &self.initial {
            InitialSpec::GroundState => InitialDistribution::ground_state(basis),
            InitialSpec::Reference => InitialDistribution::reference(basis),
            InitialSpec::Dirac { x0 } => InitialDistribution::dirac(basis, x0),
        }
    }

    /// Integrability metadata of `ν`: bounded densities are in every `L^p`.
    pub fn nu_meta(&self) -> NuMeta {
        match self.initial {
            InitialSpec::GroundState | InitialSpec::Reference => NuMeta {
                p: Some(self.initial_p.unwrap_or(f64::INFINITY)),
                q: self.initial_q.or(Some(f64::INFINITY)),
            },
            InitialSpec::Dirac { .. } => NuMeta {
                p: self.initial_p,
                q: self.initial_q,
            },
        }
    }
}
