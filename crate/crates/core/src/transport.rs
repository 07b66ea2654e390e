//! Quadratic Wasserstein distances: 1-D quantile transport and exact discrete OT.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::path::Path;

use gauss_quad::legendre::GaussLegendre;

use crate::conditional::GridMeasure;
use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

pub const MAX_DISCRETE_SUPPORT: usize = 400;
const GL_POINTS: usize = 16;

/// CDF of a piecewise-linear density on a 1-D grid, with analytic inverse per cell.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    nodes: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl QuantileTable {
    pub fn new(nodes: &[f64], density: &[f64]) -> Result<Self> {
        if nodes.len() != density.len() || nodes.len() < 2 {
            return Err(Error::Transport("density must match a grid of at least 2 nodes".into()));
        }
        if density.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::Transport("density must be nonnegative".into()));
        }
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        for j in 0..nodes.len() - 1 {
            let h = nodes[j + 1] - nodes[j];
            cdf.push(cdf[j] + 0.5 * h * (density[j] + density[j + 1]));
        }
        let total = *cdf.last().unwrap();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Transport(format!("measure is not normalized: mass {total}")));
        }
        // Remove the rounding residue so CDF(right) = 1.
        let density: Vec<f64> = density.iter().map(|f| f / total).collect();
        let cdf = cdf.iter().map(|c| c / total).collect();
        Ok(Self {
            nodes: nodes.to_vec(),
            density,
            cdf,
        })
    }

    pub fn from_measure(m: &GridMeasure) -> Result<Self> {
        if m.grid().dim() != 1 {
            return Err(Error::Transport("quantile transport needs an interval domain".into()));
        }
        Self::new(m.grid().nodes(), &m.lebesgue_density())
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return 1.0;
        }
        let j = self.nodes.partition_point(|v| *v <= x) - 1;
        let h = self.nodes[j + 1] - self.nodes[j];
        let tau = (x - self.nodes[j]) / h;
        self.cdf[j] + h * tau * (self.density[j] + 0.5 * (self.density[j + 1] - self.density[j]) * tau)
    }

    /// `F⁻¹(u)`, the left-continuous quantile.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.nodes.len();
        if u <= 0.0 {
            let first = self.cdf.iter().position(|c| *c > 0.0).unwrap_or(1);
            return self.nodes[first - 1];
        }
        if u >= 1.0 {
            let last = self.cdf.iter().position(|c| *c >= 1.0).unwrap_or(n - 1);
            return self.nodes[last];
        }
        let j = (self.cdf.partition_point(|c| *c < u)).clamp(1, n - 1) - 1;
        let h = self.nodes[j + 1] - self.nodes[j];
        let (f0, f1) = (self.density[j], self.density[j + 1]);
        let c = u - self.cdf[j];
        // h f0 τ + h (f1 − f0) τ²/2 = c, stable root.
        let a = 0.5 * h * (f1 - f0);
        let b = h * f0;
        let disc = (b * b + 4.0 * a * c).max(0.0);
        let tau = if b + disc.sqrt() > 0.0 { 2.0 * c / (b + disc.sqrt()) } else { 0.0 };
        self.nodes[j] + h * tau.clamp(0.0, 1.0)
    }
}

/// `(∫₀¹ |F₁⁻¹ − F₂⁻¹|^p du)^{1/p}` integrated piecewise over the merged
/// breakpoints of both quantile functions.
pub fn wp_quantile_tables(q1: &QuantileTable, q2: &QuantileTable, p: f64) -> f64 {
    let mut breaks: Vec<f64> = q1.cdf.iter().chain(&q2.cdf).copied().collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let gl = GaussLegendre::new(NonZeroUsize::new(GL_POINTS).unwrap());
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        // u = a + (b−a)(3v² − 2v³) removes square-root endpoint behaviour of the quantiles.
        total += gl.integrate(0.0, 1.0, |v| {
            let u = a + (b - a) * v * v * (3.0 - 2.0 * v);
            let du = (b - a) * 6.0 * v * (1.0 - v);
            (q1.quantile(u) - q2.quantile(u)).abs().powf(p) * du
        });
    }
    total.powf(1.0 / p)
}

/// `W₂` between two normalized grid measures on the same interval grid.
pub fn w2_quantile_1d(m1: &GridMeasure, m2: &GridMeasure) -> Result<f64> {
    if m1.grid() != m2.grid() {
        return Err(Error::Transport("measures live on different grids".into()));
    }
    Ok(wp_quantile_tables(&QuantileTable::from_measure(m1)?, &QuantileTable::from_measure(m2)?, 2.0))
}

/// `W₁` by the same quantile construction.
pub fn w1_quantile_1d(m1: &GridMeasure, m2: &GridMeasure) -> Result<f64> {
    if m1.grid() != m2.grid() {
        return Err(Error::Transport("measures live on different grids".into()));
    }
    Ok(wp_quantile_tables(&QuantileTable::from_measure(m1)?, &QuantileTable::from_measure(m2)?, 1.0))
}

/// Finite weighted point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::Transport("points and weights must be non-empty and of equal length".into()));
        }
        if points.len() > MAX_DISCRETE_SUPPORT {
            return Err(Error::Transport(format!(
                "support of {} points exceeds {MAX_DISCRETE_SUPPORT}",
                points.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Transport("weights must be nonnegative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Transport(format!("weights sum to {s}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    pub fn from_1d(xs: &[f64], weights: Vec<f64>) -> Result<Self> {
        Self::new(xs.iter().map(|x| vec![*x]).collect(), weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Optimal coupling with its cost and dual certificate.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// `(i, j, mass, cost per unit mass)` for every positive entry.
    pub entries: Vec<(usize, usize, f64, f64)>,
    /// `Σ π_ij |x_i − y_j|²`.
    pub cost: f64,
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
    /// `max(0, −min reduced cost)` over all cells.
    pub dual_infeasibility: f64,
    /// `max |reduced cost|` over cells carrying mass.
    pub slackness_residual: f64,
    /// `|primal − dual|`.
    pub duality_gap: f64,
    pub pivots: usize,
}

impl TransportPlan {
    pub fn w2(&self) -> f64 {
        self.cost.max(0.0).sqrt()
    }

    /// Largest marginal violation against the given weights.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        for (i, j, m, _) in &self.entries {
            ra[*i] -= m;
            rb[*j] -= m;
        }
        ra.iter().chain(&rb).fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// CSV dump `(i, j, mass, cost)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("#schema=qsdlab/1\ni,j,mass,cost\n");
        for (i, j, m, c) in &self.entries {
            let _ = writeln!(s, "{i},{j},{m:.17e},{c:.17e}");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Exact `W₂` between two point clouds by the transportation simplex on a
/// spanning-tree basis (northwest-corner start, Bland's pivoting rule).
pub fn w2_discrete(m1: &WeightedPoints, m2: &WeightedPoints) -> Result<(f64, TransportPlan)> {
    let (n, m) = (m1.len(), m2.len());
    let cost: Vec<f64> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(&m1.points[i], &m2.points[j]))
        .collect();
    let plan = network_simplex(&m1.weights, &m2.weights, &cost)?;
    Ok((plan.w2(), plan))
}

/// Spanning-tree basis over `n` row nodes and `m` column nodes (column `j` is node `n + j`).
struct Basis {
    n: usize,
    m: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
    cells: Vec<usize>,
}

impl Basis {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for &c in &self.cells {
            let (i, j) = (c / self.m, c % self.m);
            adj[i].push(c);
            adj[self.n + j].push(c);
        }
        adj
    }

    fn other_end(&self, c: usize, node: usize) -> usize {
        let (i, j) = (c / self.m, c % self.m);
        if node == i {
            self.n + j
        } else {
            i
        }
    }

    fn duals(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; self.n + self.m];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &c in &adj[node] {
                let next = self.other_end(c, node);
                if pot[next].is_nan() {
                    // u_i + v_j = c_ij
                    pot[next] = cost[c] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        (pot[..self.n].to_vec(), pot[self.n..].to_vec())
    }

    /// Cells on the tree path from row node `i` to column node `n + j`.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let target = self.n + j;
        let mut via = vec![usize::MAX; self.n + self.m];
        let mut seen = vec![false; self.n + self.m];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &c in &adj[node] {
                let next = self.other_end(c, node);
                if !seen[next] {
                    seen[next] = true;
                    via[next] = c;
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = target;
        while node != i {
            let c = via[node];
            out.push(c);
            node = self.other_end(c, node);
        }
        out.reverse();
        out
    }
}

fn network_simplex(a: &[f64], b: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    let (n, m) = (a.len(), b.len());
    let mut basis = Basis {
        n,
        m,
        flow: vec![0.0; n * m],
        basic: vec![false; n * m],
        cells: Vec::with_capacity(n + m - 1),
    };
    // Northwest corner: a staircase of exactly n + m − 1 cells.
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    loop {
        let x = ra.min(rb);
        let c = i * m + j;
        basis.flow[c] = x;
        basis.basic[c] = true;
        basis.cells.push(c);
        ra -= x;
        rb -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if j == m - 1 || (i < n - 1 && ra <= rb) {
            i += 1;
            ra = a[i];
        } else {
            j += 1;
            rb = b[j];
        }
    }

    let scale = cost.iter().fold(0.0_f64, |s, c| s.max(c.abs())).max(1.0);
    let tol = 1e-12 * scale;
    let max_pivots = 50 * (n * m + n + m);
    let mut pivots = 0;
    loop {
        let (u, v) = basis.duals(cost);
        // Bland: lowest-index cell with negative reduced cost enters.
        let entering = (0..n * m).find(|&c| !basis.basic[c] && cost[c] - u[c / m] - v[c % m] < -tol);
        let Some(enter) = entering else {
            return Ok(finish(&basis, a, b, cost, u, v, pivots));
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Transport("network simplex did not terminate".into()));
        }
        let (ei, ej) = (enter / m, enter % m);
        // Cycle: enter (+), then alternating −, +, … along the tree path from column ej back to row ei.
        let mut path = basis.path(ei, ej);
        path.reverse();
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus.iter().map(|c| basis.flow[*c]).fold(f64::INFINITY, f64::min);
        let leave = *minus
            .iter()
            .filter(|c| basis.flow[**c] <= theta)
            .min()
            .expect("cycle has a decreasing cell");
        for (k, c) in path.iter().enumerate() {
            if k % 2 == 0 {
                basis.flow[*c] -= theta;
            } else {
                basis.flow[*c] += theta;
            }
        }
        basis.flow[enter] += theta;
        basis.flow[leave] = 0.0;
        basis.basic[leave] = false;
        basis.basic[enter] = true;
        let pos = basis.cells.iter().position(|c| *c == leave).unwrap();
        basis.cells[pos] = enter;
    }
}

fn finish(basis: &Basis, a: &[f64], b: &[f64], cost: &[f64], u: Vec<f64>, v: Vec<f64>, pivots: usize) -> TransportPlan {
    let m = basis.m;
    let mut entries = Vec::new();
    let mut primal = 0.0;
    let mut slack: f64 = 0.0;
    for &c in &basis.cells {
        let f = basis.flow[c].max(0.0);
        if f > 0.0 {
            entries.push((c / m, c % m, f, cost[c]));
            primal += f * cost[c];
            slack = slack.max((cost[c] - u[c / m] - v[c % m]).abs());
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    let infeasibility = (0..cost.len())
        .map(|c| -(cost[c] - u[c / m] - v[c % m]))
        .fold(0.0, f64::max);
    let dual: f64 = a.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
    TransportPlan {
        entries,
        cost: primal,
        row_duals: u,
        col_duals: v,
        dual_infeasibility: infeasibility,
        slackness_residual: slack,
        duality_gap: (primal - dual).abs(),
        pivots,
    }
}

/// Discretize a grid measure to point masses at the nodes (trapezoid weights).
pub fn grid_point_masses(m: &GridMeasure) -> Result<WeightedPoints> {
    let g = m.grid();
    let w: Vec<f64> = m.lebesgue_density().iter().zip(g.weights()).map(|(f, w)| f * w).collect();
    let s: f64 = w.iter().sum();
    let pts = (0..g.len()).map(|i| g.point(i)).collect();
    WeightedPoints::new(pts, w.into_iter().map(|x| x / s).collect())
}

/// `4 Σ_{m≥1} c_m² / (λ_m − λ_0)`: upper bound for `W₂((1 + Σ c_m ψ_m) μ₀, μ₀)²`.
pub fn sobolev_bound(basis: &SpectralBasis, coeffs: &[f64]) -> f64 {
    4.0 * inverse_energy(basis, coeffs)
}

/// `Σ_{m≥1} c_m² / (λ_m − λ_0)`, i.e. `‖(−L₀)^{-1/2} g‖²_{L²(μ₀)}` for `g = Σ c_m ψ_m`.
pub fn inverse_energy(basis: &SpectralBasis, coeffs: &[f64]) -> f64 {
    let l = basis.lambdas();
    coeffs
        .iter()
        .zip(l)
        .skip(1)
        .map(|(c, lm)| c * c / (lm - l[0]))
        .sum()
}

/// Upper bound for `W₂(f₀μ₀, f₁μ₀)²` from the weighted-Sobolev inequality with the
/// logarithmic mean bounded below by `min_x min(f₀, f₁)`.
pub fn log_mean_bound(basis: &SpectralBasis, f0: &[f64], f1: &[f64]) -> Result<f64> {
    let interior: Vec<usize> = (0..basis.grid().len()).filter(|i| !basis.grid().is_boundary(*i)).collect();
    let floor = interior.iter().map(|i| f0[*i].min(f1[*i])).fold(f64::INFINITY, f64::min);
    if !(floor > 0.0) {
        return Err(Error::Transport("densities must be strictly positive".into()));
    }
    let diff: Vec<f64> = f0.iter().zip(f1).map(|(a, b)| a - b).collect();
    let c = basis.project_ground(&diff);
    Ok(inverse_energy(basis, &c) / floor)
}
