//! Spectral verification engine for conditional empirical measures of
//! Bernstein-subordinated killed diffusions.
//!
//! The pipeline is: build a Dirichlet eigensystem ([`spectral`]), pick a
//! Bernstein function ([`bernstein`]) and an initial law ([`semigroup`]),
//! assemble the exact spectral density of the conditional empirical measure
//! ([`conditional`]), measure its quadratic Wasserstein distance to the
//! quasi-ergodic law ([`transport`]) and compare `t² W₂²` with the limit
//! constants ([`limits`]). [`montecarlo`] is an independent path simulator
//! used as a cross-check, and [`runner`] drives config-file experiments.

pub mod bernstein;
pub mod conditional;
pub mod config;
pub mod error;
pub mod limits;
pub mod montecarlo;
pub mod runner;
pub mod semigroup;
pub mod spectral;
pub mod stats;
pub mod transport;

pub use error::{Error, Result};
