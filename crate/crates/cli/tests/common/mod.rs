#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cvqd_cli::config::{write_json, RunConfig};
use cvqd_core::ansatz::OptimizerConfig;
use cvqd_core::problem::{QuboModel, Sense};

/// Four-qubit minimization model with five well-separated nondegenerate
/// lowest levels.
pub fn small_model() -> QuboModel {
    QuboModel::new(
        0.5,
        vec![1.0, -2.3, 0.7, -1.1],
        vec![(0, 1, 0.9), (1, 2, -1.7), (2, 3, 1.3), (0, 3, -0.4), (0, 2, 0.35)],
        Sense::Minimize,
    )
    .unwrap()
}

pub fn write_model(dir: &Path) -> PathBuf {
    let path = dir.join("model.json");
    write_json(&path, &small_model()).unwrap();
    path
}

pub fn config(model: PathBuf) -> RunConfig {
    RunConfig {
        model: Some(model),
        optimizer: OptimizerConfig { restarts: 8, max_iter: 2000, seed: 3, ..OptimizerConfig::default() },
        ..RunConfig::default()
    }
}
