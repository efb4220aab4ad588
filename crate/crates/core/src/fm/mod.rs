//! Factorization-machine surrogate: training, QUBO export, correlation
//! diagnostics and the threshold-driven retraining loop.

mod active;
mod model;
mod stats;
mod train;

pub use active::{acquisition_order, active_learning_loop, RoundReport, DEFAULT_R_THRESHOLD};
pub use model::{fm_predict, fm_to_qubo, fm_to_qubo_with_sense, FmModel, DEFAULT_KAPPA};
pub use stats::pearson_r;
pub use train::{fm_train, fm_train_eval, sample_gradient, FitReport, FmGradient, TrainConfig};
