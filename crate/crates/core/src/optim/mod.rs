//! Derivative-free minimizers used by the variational loops.

mod nelder_mead;
mod spsa;

pub use nelder_mead::{nelder_mead, SimplexOptions};
pub use spsa::{spsa, SpsaGains};

/// Outcome of one local minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    /// Best parameters evaluated.
    pub x: Vec<f64>,
    /// Objective value at `x` as it was observed.
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    /// One objective value per iteration (see each method for which one).
    pub trace: Vec<f64>,
}
