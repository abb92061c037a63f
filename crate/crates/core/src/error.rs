//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by samplers, eigensolvers, and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (non-positive variance, bad shape, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Array lengths or index ranges do not fit together.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An iterative solve failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Eigenvalue interlacing was violated beyond solver tolerance, which
    /// signals a solver bug rather than randomness.
    #[error("interlacing violation: {0}")]
    Interlacing(String),

    /// Too few samples for the requested statistic.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
