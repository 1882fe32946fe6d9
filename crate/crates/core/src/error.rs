use thiserror::Error;

use crate::harness::Algorithm;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate became non-finite or left the divergence threshold.
    #[error("iterate diverged at iteration {iteration}")]
    Divergence { iteration: u64 },

    /// A divergence (or other failure) inside one run of an experiment, tagged
    /// with the run that produced it.
    #[error("{algorithm} run for seed index {replicate} failed: {source}")]
    Run {
        algorithm: Algorithm,
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Gibbs mass leaks through the boundary of the quadrature box.
    #[error("boundary cell carries mass {mass:e} (> {limit:e}); enlarge the bounds")]
    Truncation { mass: f64, limit: f64 },

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error (or the error it wraps) is a divergence.
    pub fn is_divergence(&self) -> bool {
        match self {
            Error::Divergence { .. } => true,
            Error::Run { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}
