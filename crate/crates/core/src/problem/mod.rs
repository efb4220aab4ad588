//! Bitstrings, substituent encodings, data sets and the QUBO / Ising model
//! types, plus the exhaustive-enumeration oracle.

mod bitstring;
mod dataset;
mod groups;
mod ising;
mod qubo;
mod spectrum;

pub use bitstring::{index_to_string, Bitstring};
pub use dataset::{check_consistent, load_csv, read_csv, save_csv, write_csv, LabeledSample};
pub use groups::{
    decode_groups, distinct_groups, encode_groups, encode_labels, group_string, GroupCode, DEFAULT_SITES,
};
pub use ising::{qubo_to_ising, IsingModel, MAX_ENUMERATION_QUBITS};
pub use qubo::{qubo_energy, QuboModel, Sense};
pub use spectrum::{exact_spectrum, lowest_states, Level, SpectrumSlice, DEGENERACY_RTOL};
