//! Run configuration. Values resolve in the order built-in defaults, then
//! the JSON document given with `--config`, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use cvqd_core::ansatz::{AnsatzKind, AnsatzSpec, Backend, OptimizerConfig};
use cvqd_core::deflation::{BetaPolicy, DeflationMode};
use cvqd_core::fm::TrainConfig;
use cvqd_core::mitigation::ConfusionSpec;
use cvqd_core::problem::Sense;
use cvqd_core::sim::ReadoutNoise;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    pub depth: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig { kind: AnsatzKind::Ry, depth: 1 }
    }
}

impl AnsatzConfig {
    pub fn spec(&self, n_qubits: usize) -> AnsatzSpec {
        AnsatzSpec { kind: self.kind, n_qubits, depth: self.depth }
    }
}

/// Lookup table of a secondary property keyed by bitstring. A level passes
/// when its value is at least `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondaryConfig {
    pub path: PathBuf,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Labeled CSV to train the surrogate on. Exclusive with `model`.
    pub dataset: Option<PathBuf>,
    /// Trained FM or QUBO model JSON. A QUBO file keeps its own sense.
    pub model: Option<PathBuf>,
    /// Sense applied to a surrogate trained here or loaded as an FM.
    pub sense: Sense,
    pub train: TrainConfig,
    pub ansatz: AnsatzConfig,
    pub optimizer: OptimizerConfig,
    pub backend: Backend,
    /// Excited levels searched after the ground state.
    pub k: usize,
    pub mode: DeflationMode,
    pub beta: BetaPolicy,
    /// Uniform per-qubit readout flip probability; replaces the sampled
    /// backend's `noise` once the register width is known.
    pub readout_noise: Option<f64>,
    /// Confusion spec JSON used to mitigate sampled estimates.
    pub mitigation: Option<PathBuf>,
    pub secondary: Option<SecondaryConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            model: None,
            sense: Sense::Maximize,
            train: TrainConfig::default(),
            ansatz: AnsatzConfig::default(),
            optimizer: OptimizerConfig::default(),
            backend: Backend::Exact,
            k: 4,
            mode: DeflationMode::Cvqd,
            beta: BetaPolicy::default(),
            readout_noise: None,
            mitigation: None,
            secondary: None,
        }
    }
}

fn require_file(what: &str, path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} {} does not exist", path.display())))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    pub fn validate(&self) -> CliResult<()> {
        match (&self.dataset, &self.model) {
            (Some(d), None) => require_file("dataset", d)?,
            (None, Some(m)) => require_file("model", m)?,
            (Some(_), Some(_)) => return Err(CliError::Config("give either a dataset or a model, not both".into())),
            (None, None) => return Err(CliError::Config("a dataset or a model is required".into())),
        }
        if self.readout_noise.is_some() && self.backend.is_exact() {
            return Err(CliError::Config("readout noise needs a sampled backend".into()));
        }
        if let Some(p) = &self.mitigation {
            require_file("mitigation spec", p)?;
            if self.backend.is_exact() {
                return Err(CliError::Config("mitigation needs a sampled backend".into()));
            }
        }
        if let Some(s) = &self.secondary {
            require_file("secondary table", &s.path)?;
            if !s.threshold.is_finite() {
                return Err(CliError::Config("secondary threshold must be finite".into()));
            }
        }
        if self.ansatz.depth == 0 {
            return Err(CliError::Config("ansatz depth must be at least 1".into()));
        }
        self.optimizer.validate()?;
        self.train.validate()?;
        Ok(())
    }

    /// The backend for an `n_qubits` register with uniform readout noise and
    /// any mitigation spec folded in.
    pub fn resolved_backend(&self, n_qubits: usize) -> CliResult<Backend> {
        let Backend::Sampled(s) = &self.backend else {
            return Ok(Backend::Exact);
        };
        let mut s = s.clone();
        if let Some(p) = self.readout_noise {
            s.noise = Some(ReadoutNoise::uniform(n_qubits, p)?);
        }
        if let Some(path) = &self.mitigation {
            let confusion: ConfusionSpec = read_json(path)?;
            s.mitigate = true;
            s.confusion = Some(confusion);
        }
        Ok(Backend::Sampled(s))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.to_owned(), source })
}
