use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};

use super::basis::{BasisKind, SpectralBasis};
use super::grid::tensor_product;
use super::{Domain, Grid};

/// One product mode: eigenvalue and per-factor mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMode {
    pub lambda: f64,
    pub index: Vec<usize>,
}

#[derive(PartialEq)]
struct Candidate(f64, Vec<usize>);

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on eigenvalue, then lexicographic index.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` smallest sums `Σ_j λ^{(j)}_{i_j}`, ties broken by lexicographic multi-index.
pub fn tensor_spectrum(factors: &[&[f64]], k: usize) -> Result<Vec<TensorMode>> {
    let available = factors.iter().map(|f| f.len()).try_fold(1usize, |acc, n| acc.checked_mul(n));
    if available.is_none_or(|a| k > a) {
        return Err(Error::Config(format!(
            "requested {k} tensor modes but the factors only provide {}",
            available.map_or("more than usize::MAX".into(), |a| a.to_string())
        )));
    }
    let sum = |idx: &[usize]| idx.iter().zip(factors).map(|(i, f)| f[*i]).sum::<f64>();
    let start = vec![0; factors.len()];
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Candidate(sum(&start), start.clone()));
    seen.insert(start);
    let mut out: Vec<TensorMode> = Vec::with_capacity(k);
    while let Some(Candidate(lambda, index)) = heap.pop() {
        let tie_tol = 1e-12 * lambda.abs().max(1.0);
        if out.len() >= k && lambda - out[out.len() - 1].lambda > tie_tol {
            break;
        }
        for j in 0..index.len() {
            if index[j] + 1 < factors[j].len() {
                let mut next = index.clone();
                next[j] += 1;
                if seen.insert(next.clone()) {
                    heap.push(Candidate(sum(&next), next));
                }
            }
        }
        out.push(TensorMode { lambda, index });
    }
    // Group near-equal eigenvalues and order each group lexicographically.
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && out[end].lambda - out[start].lambda <= 1e-12 * out[start].lambda.abs().max(1.0) {
            end += 1;
        }
        out[start..end].sort_by(|a, b| a.index.cmp(&b.index));
        start = end;
    }
    out.truncate(k);
    Ok(out)
}

/// Product eigensystem on the box spanned by interval `factors`.
pub fn tensor_basis(factors: &[SpectralBasis], k: usize) -> Result<SpectralBasis> {
    if factors.is_empty() {
        return Err(Error::Config("tensor basis needs at least one factor".into()));
    }
    if let Some(bad) = factors.iter().find(|f| f.dim() != 1) {
        return Err(Error::Unsupported(format!(
            "tensor factors must be interval bases, got dimension {}",
            bad.dim()
        )));
    }
    let lams: Vec<&[f64]> = factors.iter().map(|f| f.lambdas()).collect();
    let modes = tensor_spectrum(&lams, k)?;

    let domain = Domain::cube(factors.iter().flat_map(|f| f.domain().lengths()).collect())?;
    let grid = Grid::from_axes(factors.iter().map(|f| f.grid().axis(0).clone()).collect());
    let u = {
        let mut acc = vec![0.0];
        for f in factors {
            let mut next = Vec::with_capacity(acc.len() * f.u_values().len());
            for a in &acc {
                next.extend(f.u_values().iter().map(|b| a + b));
            }
            acc = next;
        }
        acc
    };
    let mut values = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    for mode in &modes {
        values.push(tensor_product(mode.index.iter().zip(factors).map(|(i, f)| f.phi(*i))));
        ratios.push(tensor_product(mode.index.iter().zip(factors).map(|(i, f)| f.ratio(*i))));
    }
    let label = factors.iter().map(|f| f.potential_label().to_string()).collect::<Vec<_>>().join(" x ");
    Ok(SpectralBasis::assemble(
        domain,
        grid,
        BasisKind::Tensor,
        label,
        u,
        modes.iter().map(|m| m.lambda).collect(),
        values,
        ratios,
    ))
}
