use crate::error::{Error, Result};

use super::Domain;

/// Uniform nodes with composite trapezoid weights along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    pub fn uniform(length: f64, n: usize) -> Self {
        let h = length / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { length } else { i as f64 * h })
            .collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }
}

/// Tensor-product quadrature grid, flattened with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

/// Uniform grid with `n` nodes per axis including both endpoints.
pub fn build_grid(domain: &Domain, n: usize) -> Result<Grid> {
    if n < Grid::MIN_NODES {
        return Err(Error::Config(format!(
            "grid needs at least {} nodes per axis, got {n}",
            Grid::MIN_NODES
        )));
    }
    Ok(Grid {
        axes: domain.lengths().into_iter().map(|l| Axis::uniform(l, n)).collect(),
    })
}

impl Grid {
    pub const MIN_NODES: usize = 3;

    pub fn from_axes(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node coordinates of a 1-D grid.
    pub fn nodes(&self) -> &[f64] {
        &self.axes[0].nodes
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    /// Per-axis indices of flattened node `i`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = i % axis.len();
            i /= axis.len();
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (i, axis)| acc * axis.len() + i)
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.multi_index(i)
            .iter()
            .zip(&self.axes)
            .map(|(j, axis)| axis.nodes[*j])
            .collect()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.multi_index(i)
            .iter()
            .zip(&self.axes)
            .any(|(j, axis)| *j == 0 || *j + 1 == axis.len())
    }

    /// Lebesgue quadrature weights on the flattened grid.
    pub fn weights(&self) -> Vec<f64> {
        tensor_product(self.axes.iter().map(|a| a.weights.as_slice()))
    }

    pub fn volume(&self) -> f64 {
        self.weights().iter().sum()
    }
}

/// Flattened outer product of per-axis vectors (last axis fastest).
pub(crate) fn tensor_product<'a>(factors: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            next.extend(f.iter().map(|b| a * b));
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn three_node_interval() {
        let g = build_grid(&Domain::interval(PI).unwrap(), 3).unwrap();
        assert_eq!(g.nodes(), &[0.0, PI / 2.0, PI]);
        assert!((g.volume() - PI).abs() < 1e-15);
    }

    #[test]
    fn unit_interval_weights_sum() {
        let g = build_grid(&Domain::interval(1.0).unwrap(), 101).unwrap();
        assert!((g.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn square_tensor_grid() {
        let g = build_grid(&Domain::cube(vec![PI, PI]).unwrap(), 64).unwrap();
        assert_eq!(g.len(), 64 * 64);
        assert!((g.volume() - PI * PI).abs() / (PI * PI) < 1e-12);
        let i = g.flat_index(&[3, 5]);
        assert_eq!(g.multi_index(i), vec![3, 5]);
        assert!(g.is_boundary(g.flat_index(&[0, 5])));
        assert!(!g.is_boundary(i));
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(
            build_grid(&Domain::interval(1.0).unwrap(), 2),
            Err(Error::Config(_))
        ));
    }
}
