use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("{what} of size {n} exceeds the supported maximum of {max}")]
    Capacity { what: &'static str, n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("correlation undefined for constant input")]
    UndefinedCorrelation,

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("optimizer diverged: {0}")]
    Divergence(String),

    #[error("deflation level {level} kept returning an already-found bitstring after {attempts} attempts")]
    LevelCollision { level: usize, attempts: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::Divergence(_)
                | Error::LevelCollision { .. }
                | Error::UndefinedCorrelation
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
