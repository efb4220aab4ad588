//! Report types and their plot-ready CSV forms.
//!
//! `levels.csv`: `rank,bitstring,groups,energy,exact_energy,oracle_energy,
//! score,oracle_score,oracle_rank,probability,secondary,pass`. Energies are in
//! the internal minimized sign; scores in the user's sense.
//!
//! `trace.csv`: `rank,iteration,objective`, one row per optimizer iteration
//! of the winning restart of each level.
//!
//! `oracle.csv`: `rank,level,bitstring,groups,energy,score`.

use std::fs::File;
use std::path::Path;

use cvqd_core::ansatz::{AnsatzSpec, Backend, VqeResult};
use cvqd_core::deflation::DeflationMode;
use cvqd_core::fm::FitReport;
use cvqd_core::problem::{group_string, SpectrumSlice};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenStatus {
    /// No secondary table: every level is reported as passing.
    Unchecked,
    /// The last reported level passed the secondary check.
    Found,
    /// Ground state and all `k` excited levels failed the check.
    Exhausted,
    /// Deflation stopped early because a level kept repeating a known state.
    DeflationStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub rank: usize,
    pub bitstring: String,
    /// Hyphen-joined group labels; absent for odd-length registers.
    pub groups: Option<String>,
    /// Backend estimate of the level energy.
    pub energy: f64,
    /// Noiseless energy of the optimized state.
    pub exact_energy: f64,
    /// Energy of the bitstring itself.
    pub oracle_energy: f64,
    /// `energy` in the user's sense.
    pub predicted_score: f64,
    /// `oracle_energy` in the user's sense.
    pub oracle_score: f64,
    /// Position of the bitstring in the exact spectrum, counting states.
    pub oracle_rank: usize,
    pub probability: f64,
    pub secondary: Option<f64>,
    pub pass: bool,
    pub beta: f64,
    pub attempts: usize,
    pub evals: usize,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub model_s: f64,
    pub levels_s: Vec<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub n_qubits: usize,
    pub ansatz: AnsatzSpec,
    pub mode: DeflationMode,
    pub optimizer_seed: u64,
    pub train_seed: Option<u64>,
    /// Fit statistics of a surrogate trained during the run.
    pub fit: Option<FitReport>,
    pub backend: Backend,
    pub shots: Option<u64>,
    pub beta: f64,
    pub k: usize,
    pub threshold: Option<f64>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub status: ScreenStatus,
    pub levels: Vec<LevelReport>,
    pub metadata: RunMetadata,
}

impl ScreeningReport {
    /// Copy with wall-clock timings zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.metadata.timings = Timings { model_s: 0.0, levels_s: vec![0.0; r.levels.len()], total_s: 0.0 };
        r
    }

    pub fn passing(&self) -> Option<&LevelReport> {
        self.levels.iter().rev().find(|l| l.pass)
    }

    pub fn write_csv(&self, dir: &Path) -> CliResult<()> {
        write_levels_csv(&dir.join("levels.csv"), &self.levels)?;
        write_trace_csv(&dir.join("trace.csv"), self.levels.iter().map(|l| (l.rank, l.trace.as_slice())))
    }
}

/// Ground-state search output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub result: VqeResult,
    pub level: LevelReport,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub rank: usize,
    pub level: usize,
    pub bitstring: String,
    pub groups: Option<String>,
    pub energy: f64,
    pub score: f64,
}

pub fn oracle_rows(s: &SpectrumSlice) -> Vec<OracleLevel> {
    let mut rank = 0;
    let mut out = Vec::new();
    for (level, l) in s.levels.iter().enumerate() {
        for x in &l.bitstrings {
            out.push(OracleLevel {
                rank,
                level,
                bitstring: x.to_string(),
                groups: group_string(x).ok(),
                energy: l.energy,
                score: l.score,
            });
            rank += 1;
        }
    }
    out
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io { path: path.to_owned(), source: std::io::Error::other(e) }
}

pub fn write_levels_csv(path: &Path, levels: &[LevelReport]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let header = [
        "rank",
        "bitstring",
        "groups",
        "energy",
        "exact_energy",
        "oracle_energy",
        "score",
        "oracle_score",
        "oracle_rank",
        "probability",
        "secondary",
        "pass",
    ];
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for l in levels {
        w.write_record([
            l.rank.to_string(),
            l.bitstring.clone(),
            l.groups.clone().unwrap_or_default(),
            l.energy.to_string(),
            l.exact_energy.to_string(),
            l.oracle_energy.to_string(),
            l.predicted_score.to_string(),
            l.oracle_score.to_string(),
            l.oracle_rank.to_string(),
            l.probability.to_string(),
            l.secondary.map(|v| v.to_string()).unwrap_or_default(),
            l.pass.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn write_trace_csv<'a>(path: &Path, traces: impl IntoIterator<Item = (usize, &'a [f64])>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["rank", "iteration", "objective"]).map_err(|e| csv_err(path, e))?;
    for (rank, trace) in traces {
        for (i, v) in trace.iter().enumerate() {
            w.write_record([rank.to_string(), i.to_string(), v.to_string()]).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn write_oracle_csv(path: &Path, rows: &[OracleLevel]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["rank", "level", "bitstring", "groups", "energy", "score"]).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.level.to_string(),
            r.bitstring.clone(),
            r.groups.clone().unwrap_or_default(),
            r.energy.to_string(),
            r.score.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_owned(), source })
}
