use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resolution error: requested {requested} modes but grid allows at most {allowed}")]
    Resolution { requested: usize, allowed: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("survival error: scaled survival Q({t}) = {q:e} is not positive; increase t")]
    Survival { t: f64, q: f64 },

    #[error("truncation insufficient: clamped negative mass {clamped:e} exceeds {limit:e}")]
    Truncation { clamped: f64, limit: f64 },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("simulation refused: {0}")]
    Simulation(String),

    #[error("failed to read {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
