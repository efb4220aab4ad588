//! Dense statevector simulation: gates, diagonal expectation values, shot
//! sampling and a classical readout-noise channel.

mod circuit;
mod noise;
mod sampling;
mod statevector;

pub use circuit::{apply_circuit, Angle, Circuit, Gate};
pub use noise::{apply_readout_noise, QubitReadout, ReadoutNoise};
pub use sampling::{sample, ShotHistogram};
pub use statevector::{diag_expectation, expectation_with_diagonal, Statevector};
