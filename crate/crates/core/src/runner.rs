//! Config-driven experiments: convergence curves, densities, limits, simulation and
//! the invariant report, each written as versioned CSV plus two-column plot files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bernstein::{check_class_alpha, default_probe, BernsteinFunction};
use crate::conditional::{
    beta_limit, conditional_coeffs, density_on_grid, ground_state_measure, regularize,
    tilde_density_on_grid, tv_distance, GridMeasure,
};
use crate::config::{BasisMethod, ExperimentConfig, MonteCarloSpec, TransportMethod};
use crate::error::{Error, Result};
use crate::limits::{divergence_probe, finiteness_classify, limit_precise, rate_fit, FinitenessVerdict, LimitSeries, RateFit};
use crate::montecarlo::{laplace_exponent_estimate, mc_conditional_empirical, McConditional, McSettings};
use crate::semigroup::{apply_p0, apply_pd, default_t0, survival_scaled, t0_probe, InitialDistribution};
use crate::spectral::{build_grid, write_basis, Domain, SpectralBasis};
use crate::transport::{grid_point_masses, log_mean_bound, sobolev_bound, w2_discrete, w2_quantile_1d};

pub const SCHEMA: &str = "#schema=qsdlab/1";

/// Note attached when the precise-limit assertion is requested for a point-mass `ν`.
pub const DIRAC_REFUSAL: &str = "outside the precise-limit hypothesis: ν must have a density";

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// CSV text with the schema line and a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("{SCHEMA}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Two-column plot file `(x, y)` with a comment header.
pub fn plot_columns(xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> String {
    let mut s = format!("# {xlabel} {ylabel}\n");
    for (x, y) in pts {
        let _ = writeln!(s, "{} {}", num(*x), num(*y));
    }
    s
}

fn write_file(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, body)?;
    files.push(p);
    Ok(())
}

/// Everything built from a config before any time-dependent work.
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub basis: SpectralBasis,
    pub bernstein: BernsteinFunction,
    pub nu: InitialDistribution,
    pub alpha: f64,
}

impl Pipeline {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate().map_err(|e| e.in_stage("config"))?;
        let basis = config.build_basis().map_err(|e| e.in_stage("basis"))?;
        let bernstein = config.bernstein.validated().map_err(|e| e.in_stage("bernstein"))?;
        let nu = config.initial(&basis).map_err(|e| e.in_stage("initial"))?;
        Ok(Self {
            alpha: config.alpha(),
            config: config.clone(),
            basis,
            bernstein,
            nu,
        })
    }

    fn w2(&self, m1: &GridMeasure, m2: &GridMeasure) -> Result<f64> {
        match self.config.transport {
            TransportMethod::Quantile => w2_quantile_1d(m1, m2),
            TransportMethod::Discrete => {
                let (w, _) = w2_discrete(&grid_point_masses(m1)?, &grid_point_masses(m2)?)?;
                Ok(w)
            }
        }
    }
}

/// One `t` of a convergence run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub t: f64,
    pub q: f64,
    pub t2w2: f64,
    /// `t² W₂(μ̃_{t,β}, μ₀)²` when `β` is configured.
    pub t2w2_tilde: Option<f64>,
    pub tv: f64,
    pub limit: f64,
    pub upper: f64,
    pub clamp: f64,
    pub cross_tail: f64,
    pub limit_tail: f64,
    pub warning: Option<String>,
}

impl ResultRow {
    pub const HEADER: [&'static str; 12] = [
        "t",
        "q",
        "t2w2",
        "t2w2_tilde",
        "tv",
        "limit_precise",
        "limit_upper_i",
        "ratio",
        "clamp_mass",
        "cross_tail",
        "limit_tail",
        "flag",
    ];

    pub fn ratio(&self) -> f64 {
        self.t2w2 / self.limit
    }

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.t),
            num(self.q),
            num(self.t2w2),
            self.t2w2_tilde.map_or_else(|| "NaN".into(), num),
            num(self.tv),
            num(self.limit),
            num(self.upper),
            num(self.ratio()),
            num(self.clamp),
            num(self.cross_tail),
            num(self.limit_tail),
            self.warning.clone().unwrap_or_else(|| "ok".into()).replace(',', ";"),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn tag(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

/// Outcome of one configured assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name, status, detail }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ResultRow>,
    pub limit: LimitSeries,
    pub finiteness: FinitenessVerdict,
    pub rate: std::result::Result<RateFit, String>,
    pub checks: Vec<Check>,
}

impl ConvergenceReport {
    /// No configured assertion failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn rows_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self.rows.iter().map(ResultRow::cells).collect();
        csv_table(&ResultRow::HEADER, &rows)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{SCHEMA}\n");
        let _ = writeln!(s, "limit_precise={}", num(self.limit.value()));
        let _ = writeln!(s, "limit_upper_i={}", num(self.limit.upper_constant()));
        let _ = writeln!(s, "limit_tail_bound={}", num(self.limit.tail_bound));
        let _ = writeln!(s, "limit_verdict={}", if self.limit.is_convergent() { "convergent" } else { "divergence-indicated" });
        let _ = writeln!(s, "finiteness_case={:?}", self.finiteness.case);
        let _ = writeln!(s, "p0={}", num(self.finiteness.p0));
        match &self.rate {
            Ok(r) => {
                let _ = writeln!(s, "rate_limit={}", num(r.limit));
                let _ = writeln!(s, "rate_slope={}", num(r.slope));
                let _ = writeln!(s, "rate_r_squared={}", num(r.r_squared));
                let _ = writeln!(s, "rate_reliable={}", r.reliable);
                if let Some(n) = &r.note {
                    let _ = writeln!(s, "rate_note={n}");
                }
            }
            Err(e) => {
                let _ = writeln!(s, "rate_fit=unavailable: {e}");
            }
        }
        for c in &self.checks {
            let _ = writeln!(s, "check.{}={}: {}", c.name, c.status.tag(), c.detail);
        }
        let _ = writeln!(s, "overall={}", if self.passed() { "pass" } else { "fail" });
        s
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        write_file(dir, "convergence.csv", &self.rows_csv(), &mut files)?;
        write_file(dir, "summary.txt", &self.summary(), &mut files)?;
        let curve = |f: &dyn Fn(&ResultRow) -> f64| -> Vec<(f64, f64)> { self.rows.iter().map(|r| (r.t, f(r))).collect() };
        write_file(dir, "t2w2.dat", &plot_columns("t", "t2w2", &curve(&|r| r.t2w2)), &mut files)?;
        write_file(dir, "ratio.dat", &plot_columns("t", "ratio", &curve(&|r| r.ratio())), &mut files)?;
        write_file(dir, "tv.dat", &plot_columns("t", "tv", &curve(&|r| r.tv)), &mut files)?;
        write_file(dir, "survival.dat", &plot_columns("t", "q", &curve(&|r| r.q)), &mut files)?;
        if self.rows.iter().all(|r| r.t2w2_tilde.is_some()) {
            let pts = curve(&|r| r.t2w2_tilde.unwrap());
            write_file(dir, "t2w2_tilde.dat", &plot_columns("t", "t2w2_tilde", &pts), &mut files)?;
        }
        Ok(files)
    }
}

fn convergence_row(p: &Pipeline, limit: &LimitSeries, mu0: &GridMeasure, t: f64) -> Result<ResultRow> {
    let cfg = &p.config;
    let q = survival_scaled(&p.basis, &p.bernstein, &p.nu, t).map_err(|e| e.in_stage("survival"))?;
    let coeffs =
        conditional_coeffs(&p.basis, &p.bernstein, &p.nu, t, cfg.basis.kcross).map_err(|e| e.in_stage("conditional"))?;
    let m = density_on_grid(&coeffs, &p.basis).map_err(|e| e.in_stage("density"))?;
    let w = p.w2(&m, mu0).map_err(|e| e.in_stage("transport"))?;
    let tv = tv_distance(&m, mu0).map_err(|e| e.in_stage("transport"))?;
    let t2w2_tilde = match cfg.beta {
        Some(beta) => {
            let r = regularize(&p.basis, &coeffs, beta, p.alpha).map_err(|e| e.in_stage("regularize"))?;
            let mt = tilde_density_on_grid(&r, &p.basis).map_err(|e| e.in_stage("regularize"))?;
            let wt = p.w2(&mt, mu0).map_err(|e| e.in_stage("transport"))?;
            Some(t * t * wt * wt)
        }
        None => None,
    };
    let mut warning = m.warning().map(str::to_string);
    if m.clamped_mass() > cfg.tolerances.clamp_warn && warning.is_none() {
        warning = Some(format!("clamped mass {:e}", m.clamped_mass()));
    }
    Ok(ResultRow {
        t,
        q,
        t2w2: t * t * w * w,
        t2w2_tilde,
        tv,
        limit: limit.value(),
        upper: limit.upper_constant(),
        clamp: m.clamped_mass(),
        cross_tail: coeffs.cross_tail,
        limit_tail: limit.tail_bound,
        warning,
    })
}

/// Densities and `t² W₂²` over the configured `t` grid, compared with the limit constants.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let p = Pipeline::new(config)?;
    let cfg = &p.config;
    let tol = &cfg.tolerances;
    let limit = limit_precise(&p.basis, &p.bernstein, &p.nu, cfg.basis.k).map_err(|e| e.in_stage("limit"))?;
    let finiteness =
        finiteness_classify(p.basis.dim(), p.alpha, cfg.nu_meta()).map_err(|e| e.in_stage("limit"))?;
    let mu0 = ground_state_measure(&p.basis).map_err(|e| e.in_stage("density"))?;
    let rows: Vec<ResultRow> = cfg
        .times
        .par_iter()
        .map(|t| convergence_row(&p, &limit, &mu0, *t))
        .collect::<Result<_>>()?;

    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r.t2w2).collect();
    let rate = rate_fit(&ts, &vals).map_err(|e| e.to_string());

    let mut checks = Vec::new();
    if cfg.assertions.precise_limit {
        checks.push(if p.nu.is_dirac() {
            Check {
                name: "precise_limit",
                status: CheckStatus::Skipped,
                detail: DIRAC_REFUSAL.into(),
            }
        } else if !limit.is_convergent() {
            Check::new("precise_limit", false, "limit series diverges".into())
        } else {
            let last = rows.last().unwrap();
            let ratio = last.ratio();
            let in_band = ratio >= tol.limit_ratio_low && ratio <= tol.limit_ratio_high;
            let tail: Vec<f64> = rows[rows.len().saturating_sub(3)..].iter().map(|r| (r.ratio() - 1.0).abs()).collect();
            let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
            Check::new(
                "precise_limit",
                in_band && monotone,
                format!(
                    "ratio {ratio:.6} at t={} in [{}, {}]: {in_band}; monotone approach over last {}: {monotone}",
                    last.t,
                    tol.limit_ratio_low,
                    tol.limit_ratio_high,
                    tail.len()
                ),
            )
        });
    }
    if cfg.assertions.upper_bound {
        let bound = limit.upper_constant() * (1.0 + tol.upper_slack);
        let worst = rows
            .iter()
            .filter(|r| r.t >= tol.upper_from_t)
            .map(|r| r.t2w2)
            .fold(0.0, f64::max);
        let ok = !limit.is_convergent() || worst <= bound;
        checks.push(Check::new(
            "upper_bound",
            ok,
            format!("max t2w2 for t >= {} is {worst:.6e}, bound {bound:.6e}", tol.upper_from_t),
        ));
    }
    if cfg.assertions.tv_decay {
        let decreasing = rows.windows(2).all(|w| w[1].tv < w[0].tv);
        let last = rows.last().unwrap().tv;
        checks.push(Check::new(
            "tv_decay",
            decreasing && last < tol.tv_final,
            format!("strictly decreasing: {decreasing}; final {last:.6e} < {}", tol.tv_final),
        ));
    }
    Ok(ConvergenceReport {
        rows,
        limit,
        finiteness,
        rate,
        checks,
    })
}

/// Basis file, eigenvalue table and Weyl plot.
pub fn run_eigensys(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let basis = config.build_basis().map_err(|e| e.in_stage("basis"))?;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let path = dir.join("basis.txt");
    write_basis(&basis, &path)?;
    files.push(path);
    let rows: Vec<Vec<String>> = basis
        .lambdas()
        .iter()
        .enumerate()
        .map(|(k, l)| vec![k.to_string(), num(*l), num(basis.mu_coeffs()[k])])
        .collect();
    write_file(dir, "eigenvalues.csv", &csv_table(&["k", "lambda", "mu_phi"], &rows), &mut files)?;
    let pts: Vec<(f64, f64)> = basis.lambdas().iter().enumerate().map(|(k, l)| (k as f64, *l)).collect();
    write_file(dir, "eigenvalues.dat", &plot_columns("k", "lambda", &pts), &mut files)?;
    let summary = format!(
        "{SCHEMA}\nmodes={}\northonormality_residual={}\nboundary_max={}\nweyl_constant={}\n",
        basis.len(),
        num(basis.orthonormality_residual()),
        num(basis.boundary_max()),
        num(basis.weyl_constant())
    );
    write_file(dir, "eigensys.txt", &summary, &mut files)?;
    Ok(files)
}

/// Limit series terms and partial sums with the finiteness classification.
pub fn run_limit(config: &ExperimentConfig, dir: &Path) -> Result<(LimitSeries, Vec<PathBuf>)> {
    let p = Pipeline::new(config)?;
    let limit = limit_precise(&p.basis, &p.bernstein, &p.nu, config.basis.k).map_err(|e| e.in_stage("limit"))?;
    let fin = finiteness_classify(p.basis.dim(), p.alpha, config.nu_meta()).map_err(|e| e.in_stage("limit"))?;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let rows: Vec<Vec<String>> = limit
        .terms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, term)| vec![m.to_string(), num(*term), num(limit.partial_sums[m - 1])])
        .collect();
    write_file(dir, "limit_series.csv", &csv_table(&["m", "term", "partial_sum"], &rows), &mut files)?;
    let pts: Vec<(f64, f64)> = limit.partial_sums.iter().enumerate().map(|(k, s)| ((k + 1) as f64, *s)).collect();
    write_file(dir, "partial_sums.dat", &plot_columns("k", "partial_sum", &pts), &mut files)?;
    let mut s = format!("{SCHEMA}\n");
    let _ = writeln!(s, "limit_precise={}", num(limit.value()));
    let _ = writeln!(s, "limit_upper_i={}", num(limit.upper_constant()));
    let _ = writeln!(s, "tail_bound={}", num(limit.tail_bound));
    let _ = writeln!(s, "verdict={:?}", limit.verdict);
    let _ = writeln!(s, "alpha={}", num(p.alpha));
    let _ = writeln!(s, "finiteness_case={:?}", fin.case);
    let _ = writeln!(s, "dimension_bound={}", num(fin.dimension_bound));
    let _ = writeln!(s, "p_threshold={}", num(fin.p_threshold));
    let _ = writeln!(s, "q_threshold={}", num(fin.q_threshold));
    let _ = writeln!(s, "p0={}", num(fin.p0));
    write_file(dir, "limit.txt", &s, &mut files)?;
    Ok((limit, files))
}

/// Grid densities of `μ_t` (and `μ̃_{t,β}`) with respect to `μ₀`, one file per `t`.
pub fn run_density(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let p = Pipeline::new(config)?;
    std::fs::create_dir_all(dir)?;
    let tables: Vec<(f64, String)> = config
        .times
        .par_iter()
        .map(|t| {
            let c = conditional_coeffs(&p.basis, &p.bernstein, &p.nu, *t, config.basis.kcross)
                .map_err(|e| e.in_stage("conditional"))?;
            let m = density_on_grid(&c, &p.basis).map_err(|e| e.in_stage("density"))?;
            let tilde = match config.beta {
                Some(beta) => {
                    let r = regularize(&p.basis, &c, beta, p.alpha).map_err(|e| e.in_stage("regularize"))?;
                    Some(tilde_density_on_grid(&r, &p.basis).map_err(|e| e.in_stage("regularize"))?)
                }
                None => None,
            };
            let g = p.basis.grid();
            let dim = g.dim();
            let mut header: Vec<String> = (0..dim).map(|j| format!("x{j}")).collect();
            header.extend(["density_mu0".into(), "density_lebesgue".into()]);
            if tilde.is_some() {
                header.push("tilde_density_mu0".into());
            }
            let leb = m.lebesgue_density();
            let rows: Vec<Vec<String>> = (0..g.len())
                .map(|i| {
                    let mut r: Vec<String> = g.point(i).into_iter().map(num).collect();
                    r.push(num(m.density()[i]));
                    r.push(num(leb[i]));
                    if let Some(tm) = &tilde {
                        r.push(num(tm.density()[i]));
                    }
                    r
                })
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok((*t, csv_table(&h, &rows)))
        })
        .collect::<Result<_>>()?;
    let mut files = Vec::new();
    for (t, body) in tables {
        write_file(dir, &format!("density_t{t}.csv"), &body, &mut files)?;
    }
    Ok(files)
}

fn mc_block(config: &ExperimentConfig) -> Result<&MonteCarloSpec> {
    config
        .monte_carlo
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [monte_carlo] block".into()))
}

fn mc_settings(mc: &MonteCarloSpec) -> McSettings {
    McSettings {
        n_paths: mc.n_paths,
        bins: mc.bins,
        seed: mc.seed,
        obs_points: mc.obs_points,
        step: mc.step,
        bridge: mc.bridge,
    }
}

/// Monte Carlo histogram and survival compared with the spectral values.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub mc: McConditional,
    pub tv: f64,
    pub survival_sigmas: f64,
    pub checks: Vec<Check>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

pub fn run_simulate(config: &ExperimentConfig) -> Result<SimulationReport> {
    let mc = mc_block(config)?;
    let p = Pipeline::new(config)?;
    let coeffs = conditional_coeffs(&p.basis, &p.bernstein, &p.nu, mc.t, config.basis.kcross)
        .map_err(|e| e.in_stage("conditional"))?;
    let m = density_on_grid(&coeffs, &p.basis).map_err(|e| e.in_stage("density"))?;
    let out = mc_conditional_empirical(&p.basis, &config.potential(), &p.bernstein, &p.nu, mc.t, &mc_settings(mc))
        .map_err(|e| e.in_stage("simulate"))?;
    let tv = out.histogram.tv_against(&m).map_err(|e| e.in_stage("simulate"))?;
    let sigmas = (out.survival - out.expected_survival).abs() / out.survival_se;
    let tol = &config.tolerances;
    let checks = vec![
        Check::new("mc_tv", tv <= tol.mc_tv, format!("tv {tv:.6e} <= {}", tol.mc_tv)),
        Check::new(
            "mc_survival",
            sigmas <= tol.mc_sigmas,
            format!(
                "survival {:.6e} vs {:.6e}: {sigmas:.3} standard errors <= {}",
                out.survival, out.expected_survival, tol.mc_sigmas
            ),
        ),
    ];
    Ok(SimulationReport {
        mc: out,
        tv,
        survival_sigmas: sigmas,
        checks,
    })
}

impl SimulationReport {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        write_file(dir, "mc_histogram.csv", &self.mc.histogram.to_csv(), &mut files)?;
        let pts: Vec<(f64, f64)> = self.mc.histogram.centers().into_iter().zip(self.mc.histogram.masses.iter().copied()).collect();
        write_file(dir, "mc_histogram.dat", &plot_columns("x", "mass", &pts), &mut files)?;
        let mut meta = format!("{SCHEMA}\n{}", self.mc.metadata());
        let _ = writeln!(meta, "tv={}", num(self.tv));
        for c in &self.checks {
            let _ = writeln!(meta, "check.{}={}: {}", c.name, c.status.tag(), c.detail);
        }
        write_file(dir, "mc_metadata.txt", &meta, &mut files)?;
        Ok(files)
    }
}

/// One invariant measured by [`run_verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyEntry {
    pub module: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Depends on the Monte Carlo seed.
    pub mc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> Vec<&VerifyEntry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.module.into(),
                    e.name.into(),
                    num(e.measured),
                    num(e.threshold),
                    if e.passed { "pass" } else { "fail" }.into(),
                    if e.mc { "mc" } else { "spectral" }.into(),
                ]
            })
            .collect();
        csv_table(&["module", "name", "measured", "threshold", "status", "tag"], &rows)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        write_file(dir, "verify.csv", &self.to_csv(), &mut files)?;
        Ok(files)
    }
}

struct Entries(Vec<VerifyEntry>);

impl Entries {
    /// `measured ≤ threshold`.
    fn le(&mut self, module: &'static str, name: &'static str, measured: f64, threshold: f64) {
        self.push(module, name, measured, threshold, measured <= threshold, false);
    }

    fn push(&mut self, module: &'static str, name: &'static str, measured: f64, threshold: f64, passed: bool, mc: bool) {
        self.0.push(VerifyEntry {
            module,
            name,
            measured,
            threshold,
            passed: passed && !measured.is_nan(),
            mc,
        });
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Invariant suites of every module at the config's sizes; failures are entries, not errors.
pub fn run_verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    let p = Pipeline::new(config)?;
    let (basis, b, nu) = (&p.basis, &p.bernstein, &p.nu);
    let tol = &config.tolerances;
    let mut e = Entries(Vec::new());
    let stage = |name: &'static str| move |err: Error| err.in_stage(name);

    // spectral
    let ortho_tol = match config.basis.method {
        BasisMethod::FiniteDifference => tol.orthonormality_fd,
        _ => tol.orthonormality_closed_form,
    };
    e.le("spectral", "orthonormality_residual", basis.orthonormality_residual(), ortho_tol);
    e.le("spectral", "boundary_max", basis.boundary_max(), ortho_tol);
    let interior_min = (0..basis.grid().len())
        .filter(|i| !basis.grid().is_boundary(*i))
        .map(|i| basis.phi(0)[i])
        .fold(f64::INFINITY, f64::min);
    e.push("spectral", "ground_state_min_interior", interior_min, 0.0, interior_min > 0.0, false);
    let lam_sorted = basis.lambdas().windows(2).all(|w| w[1] >= w[0]);
    e.push("spectral", "eigenvalues_sorted", lam_sorted as u8 as f64, 1.0, lam_sorted, false);

    // bernstein
    let probe = default_probe();
    let class = check_class_alpha(b, p.alpha, &probe).map_err(stage("verify"))?;
    e.push("bernstein", "class_alpha_inf", class.inf_value, 0.0, class.passed, false);
    let bl = basis.lambdas();
    let monotone = bl.windows(2).all(|w| b.value(w[1]) >= b.value(w[0]));
    e.push("bernstein", "monotone_on_spectrum", monotone as u8 as f64, 1.0, monotone, false);

    // semigroup
    let f: Vec<f64> = basis.phi(0).iter().enumerate().map(|(i, v)| v * (1.0 + (i % 7) as f64 / 7.0)).collect();
    let (s1, s2) = (0.05, 0.1);
    let lhs = apply_pd(basis, s1 + s2, &f).map_err(stage("verify"))?;
    let rhs = apply_pd(basis, s1, &apply_pd(basis, s2, &f).map_err(stage("verify"))?).map_err(stage("verify"))?;
    e.le("semigroup", "semigroup_law", max_abs_diff(&lhs, &rhs), tol.semigroup_law);
    let g: Vec<f64> = basis.phi(0).iter().zip(basis.grid().nodes()).map(|(v, x)| v * x.sin().abs()).collect();
    let pf = apply_pd(basis, s1, &f).map_err(stage("verify"))?;
    let pg = apply_pd(basis, s1, &g).map_err(stage("verify"))?;
    let a: f64 = g.iter().zip(&pf).zip(basis.mu_weights()).map(|((x, y), w)| x * y * w).sum();
    let c: f64 = f.iter().zip(&pg).zip(basis.mu_weights()).map(|((x, y), w)| x * y * w).sum();
    e.le("semigroup", "symmetry", (a - c).abs(), tol.semigroup_law);
    let ones = vec![1.0; basis.grid().len()];
    let p0 = apply_p0(basis, 0.5, &ones).map_err(stage("verify"))?;
    e.le("semigroup", "p0_conservative", max_abs_diff(&p0, &ones), tol.semigroup_law);
    let t0 = default_t0(basis, b, nu, &t0_probe());
    e.push("semigroup", "t0_found", t0.unwrap_or(f64::NAN), 64.0, t0.is_some(), false);

    // conditional
    let mu0 = ground_state_measure(basis).map_err(stage("verify"))?;
    let tmax = *config.times.last().unwrap();
    let coeffs = conditional_coeffs(basis, b, nu, tmax, config.basis.kcross).map_err(stage("verify"))?;
    e.le("conditional", "zero_mean", coeffs.mean(basis).abs(), tol.zero_mean);
    e.le("conditional", "xi_zero_mean", coeffs.xi_mean(basis).abs(), tol.zero_mean);
    let m = density_on_grid(&coeffs, basis).map_err(stage("verify"))?;
    e.le("conditional", "clamp_mass", m.clamped_mass(), tol.clamp_warn);
    e.le("conditional", "mass_error", (m.mass() - 1.0).abs(), 1e-12);
    if let Some(beta) = config.beta {
        let r = regularize(basis, &coeffs, beta, p.alpha).map_err(stage("verify"))?;
        let mt = tilde_density_on_grid(&r, basis).map_err(stage("verify"))?;
        e.le("conditional", "tilde_mass_error", (mt.mass() - 1.0).abs(), 1e-8);
        e.push("conditional", "beta_admissible", beta, beta_limit(basis.dim(), p.alpha), true, false);
    }

    // transport
    if basis.dim() == 1 {
        let length = basis.domain().lengths()[0];
        let grid = build_grid(&Domain::interval(length).map_err(stage("verify"))?, 200).map_err(stage("verify"))?;
        let half: Vec<f64> = grid.nodes().iter().map(|x| if *x <= 0.5 * length { 1.0 } else { 0.0 }).collect();
        let m1 = GridMeasure::lebesgue(grid.clone(), vec![1.0; 200]).map_err(stage("verify"))?;
        let m2 = GridMeasure::lebesgue(grid.clone(), half).map_err(stage("verify"))?;
        let wq = w2_quantile_1d(&m1, &m2).map_err(stage("verify"))?;
        let (wd, plan) = w2_discrete(&grid_point_masses(&m1).map_err(stage("verify"))?, &grid_point_masses(&m2).map_err(stage("verify"))?)
            .map_err(stage("verify"))?;
        e.le("transport", "quantile_vs_lp", (wq - wd).abs(), 2.0 * grid.max_spacing());
        e.le("transport", "slackness_residual", plan.slackness_residual, tol.slackness);
        e.le("transport", "dual_infeasibility", plan.dual_infeasibility, tol.slackness);
        let w = w2_quantile_1d(&m, &mu0).map_err(stage("verify"))?;
        let f = basis.project_ground(&coeffs.rho(basis));
        let bound = sobolev_bound(basis, &f);
        e.le("transport", "sobolev_bound_slack", w * w - bound, 0.0);
        let f1: Vec<f64> = m.density().to_vec();
        match log_mean_bound(basis, &ones, &f1) {
            Ok(lm) => e.le("transport", "log_mean_bound_slack", w * w - lm, 0.0),
            Err(_) => e.push("transport", "log_mean_bound_slack", f64::NAN, 0.0, true, false),
        }
    }

    // limits
    let limit = limit_precise(basis, b, nu, config.basis.k).map_err(stage("verify"))?;
    e.le("limits", "factor_four", rel_diff(limit.upper_constant(), 4.0 * limit.value()), 0.0);
    let sorted = limit.partial_sums.windows(2).all(|w| w[1] >= w[0]);
    e.push("limits", "partial_sums_nondecreasing", sorted as u8 as f64, 1.0, sorted, false);
    let half_k = (config.basis.k / 2).max(2);
    let short = limit_precise(basis, b, nu, half_k).map_err(stage("verify"))?;
    if limit.is_convergent() && short.is_convergent() {
        e.le("limits", "tail_bound_validity", limit.value() - short.value(), short.tail_bound);
    }
    let fin = finiteness_classify(basis.dim(), p.alpha, config.nu_meta()).map_err(stage("verify"))?;
    let probe = divergence_probe(basis.dim(), p.alpha, 1024).map_err(stage("verify"))?;
    let case1 = matches!(fin.case, crate::limits::FinitenessCase::Case1);
    e.push(
        "limits",
        "classifier_consistency",
        probe.divergence_indicated as u8 as f64,
        0.0,
        case1 != probe.divergence_indicated,
        false,
    );

    // montecarlo
    if let Some(mc) = &config.monte_carlo {
        let n = (mc.n_paths / 2).max(10_000);
        let mut worst: f64 = 0.0;
        for (i, lam) in [1.0, 4.0, 9.0].into_iter().enumerate() {
            let (est, se) = laplace_exponent_estimate(b, 1.0, lam, n, mc.seed.wrapping_add(i as u64)).map_err(stage("verify"))?;
            worst = worst.max((est - b.eval(lam).map_err(stage("verify"))?).abs() / se.max(f64::MIN_POSITIVE));
        }
        e.push("montecarlo", "laplace_exponent_sigmas", worst, tol.mc_sigmas, worst <= tol.mc_sigmas, true);
        if basis.dim() == 1 {
            let sim = run_simulate(config)?;
            e.push("montecarlo", "histogram_tv", sim.tv, tol.mc_tv, sim.tv <= tol.mc_tv, true);
            e.push(
                "montecarlo",
                "survival_sigmas",
                sim.survival_sigmas,
                tol.mc_sigmas,
                sim.survival_sigmas <= tol.mc_sigmas,
                true,
            );
        }
    }
    Ok(VerifyReport { entries: e.0 })
}
