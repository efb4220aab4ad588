//! Quadratic binary surrogate models and variational excited-state search.
//!
//! The pipeline learns a factorization-machine surrogate from labeled
//! bitstrings ([`fm`]), exports it as a QUBO, maps that onto a diagonal Ising
//! Hamiltonian ([`problem`]) and then searches the lowest few levels with
//! variational circuits on a dense statevector simulator ([`sim`],
//! [`ansatz`], [`deflation`]). Sampled runs can be corrected for readout
//! error ([`mitigation`]). Every result can be checked against exhaustive
//! enumeration ([`problem::exact_spectrum`]).

pub mod ansatz;
pub mod deflation;
pub mod error;
pub mod fm;
pub mod mitigation;
pub mod optim;
pub mod planted;
pub mod problem;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
