use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Model domain: a closed interval `[0, L]` or a box `[0, L_1] x ... x [0, L_d]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { length: f64 },
    Box { lengths: Vec<f64> },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(format!("interval length must be positive, got {length}")));
        }
        Ok(Domain::Interval { length })
    }

    pub fn cube(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Config("box needs at least one side".into()));
        }
        if let Some(bad) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::Config(format!("box side lengths must be positive, got {bad}")));
        }
        Ok(Domain::Box { lengths })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lengths } => lengths.len(),
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        match self {
            Domain::Interval { length } => vec![*length],
            Domain::Box { lengths } => lengths.clone(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        self.lengths().iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, Domain::Interval { .. })
    }

    pub(crate) fn describe(&self) -> String {
        match self {
            Domain::Interval { length } => format!("interval {length:.17e}"),
            Domain::Box { lengths } => {
                let mut s = format!("box {}", lengths.len());
                for l in lengths {
                    s.push_str(&format!(" {l:.17e}"));
                }
                s
            }
        }
    }
}

#[derive(Clone)]
enum PotentialKind {
    Constant,
    Linear { slope: f64 },
    Field { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

/// Potential `U` on an interval, stored already shifted so that `e^U dx` is a
/// probability measure on the grid it was normalized against.
#[derive(Clone)]
pub struct Potential {
    kind: PotentialKind,
    shift: f64,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("kind", &self.label())
            .field("shift", &self.shift)
            .finish()
    }
}

impl Potential {
    pub fn constant() -> Self {
        Self { kind: PotentialKind::Constant, shift: 0.0 }
    }

    /// `U(x) = slope * x + const`.
    pub fn linear(slope: f64) -> Self {
        Self { kind: PotentialKind::Linear { slope }, shift: 0.0 }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: PotentialKind::Field { label: label.into(), f: Arc::new(f) },
            shift: 0.0,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Constant => 0.0,
            PotentialKind::Linear { slope } => slope * x,
            PotentialKind::Field { f, .. } => f(x),
        }
    }

    /// Normalized value `U(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.raw(x) - self.shift
    }

    /// `U'(x)`; central difference for user fields.
    pub fn gradient(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Constant => 0.0,
            PotentialKind::Linear { slope } => *slope,
            PotentialKind::Field { f, .. } => {
                let h = 1e-6 * (1.0 + x.abs());
                (f(x + h) - f(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant)
    }

    pub fn label(&self) -> String {
        match &self.kind {
            PotentialKind::Constant => "constant".to_string(),
            PotentialKind::Linear { slope } => format!("linear {slope:.17e}"),
            PotentialKind::Field { label, .. } => format!("field {label}"),
        }
    }

    /// Shift so that the trapezoid integral of `e^U` over `nodes` equals one.
    pub fn normalized(mut self, nodes: &[f64], weights: &[f64]) -> Self {
        let z: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * self.raw(*x).exp())
            .sum();
        self.shift = z.ln();
        self
    }
}
