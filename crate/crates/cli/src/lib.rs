//! Library half of the `cvqd` command: configuration, subcommand bodies and
//! report types, usable without the argument parser.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use error::{CliError, CliResult};
