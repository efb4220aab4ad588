use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{FmModel, DEFAULT_KAPPA};
use super::stats::{mean_std, pearson_r};
use crate::error::{Error, Result};
use crate::problem::{check_consistent, Bitstring, LabeledSample};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub kappa: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub init_scale: f64,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { kappa: DEFAULT_KAPPA, epochs: 300, learning_rate: 0.01, init_scale: 0.01, seed: 0, l2: 1e-4 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::InvalidParameter("kappa must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(self.l2 >= 0.0 && self.init_scale >= 0.0) {
            return Err(Error::InvalidParameter("l2 and init_scale must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Mean squared error on the training set, original units.
    pub train_loss: f64,
    /// Training MSE of the initialized model.
    pub initial_loss: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Pearson R on the training set; absent when undefined.
    pub r_train: Option<f64>,
    /// Pearson R on held-out samples; absent without a usable test set.
    pub r_test: Option<f64>,
    /// Pearson R over every sample supplied (training and held-out).
    pub r_all: Option<f64>,
}

/// Gradient of `(y_hat - y)^2` for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FmGradient {
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

/// Analytic gradient of the squared error of one sample with respect to
/// every parameter.
pub fn sample_gradient(m: &FmModel, x: &Bitstring, y: f64) -> Result<FmGradient> {
    x.ensure_len(m.n)?;
    let mut sums = vec![0.0; m.kappa];
    let err2 = 2.0 * (m.predict_with_sums(x, &mut sums) - y);
    let mut g = FmGradient { w0: err2, w: vec![0.0; m.n], v: vec![vec![0.0; m.kappa]; m.n] };
    for i in (0..m.n).filter(|&i| x.bit(i) == 1) {
        g.w[i] = err2;
        for ((g, s), v) in g.v[i].iter_mut().zip(&sums).zip(&m.v[i]) {
            *g = err2 * (s - v);
        }
    }
    Ok(g)
}

fn mse(m: &FmModel, data: &[LabeledSample]) -> f64 {
    let mut sums = vec![0.0; m.kappa];
    data.iter().map(|s| (m.predict_with_sums(&s.x, &mut sums) - s.y).powi(2)).sum::<f64>() / data.len() as f64
}

fn predictions(m: &FmModel, data: &[LabeledSample]) -> Vec<f64> {
    let mut sums = vec![0.0; m.kappa];
    data.iter().map(|s| m.predict_with_sums(&s.x, &mut sums)).collect()
}

fn correlation(m: &FmModel, data: &[LabeledSample]) -> Option<f64> {
    if data.len() < 2 {
        return None;
    }
    let truth: Vec<f64> = data.iter().map(|s| s.y).collect();
    pearson_r(&predictions(m, data), &truth).ok()
}

/// Plain SGD on the squared loss of standardized targets.
///
/// Each epoch visits the samples in a fresh seeded permutation. The
/// parameters of the epoch with the lowest training loss are kept, so the
/// returned loss never exceeds the loss at initialization.
fn sgd(data: &[LabeledSample], n: usize, cfg: &TrainConfig) -> Result<(FmModel, f64, f64)> {
    let targets: Vec<f64> = data.iter().map(|s| s.y).collect();
    let (mean, sd) = mean_std(&targets);
    let scale = if sd > 0.0 { sd } else { 1.0 };
    let scaled: Vec<LabeledSample> = data.iter().map(|s| LabeledSample { x: s.x, y: (s.y - mean) / scale }).collect();

    let mut rng = rng::seeded(cfg.seed);
    let mut m = FmModel::zeros(n, cfg.kappa);
    for row in m.v.iter_mut() {
        for v in row.iter_mut() {
            *v = if cfg.init_scale > 0.0 { rng.random_range(-cfg.init_scale..cfg.init_scale) } else { 0.0 };
        }
    }

    let initial = mse(&m, &scaled);
    let mut best = (m.clone(), initial);
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    let mut sums = vec![0.0; cfg.kappa];
    let (lr, l2) = (cfg.learning_rate, cfg.l2);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let s = &scaled[idx];
            let err2 = 2.0 * (m.predict_with_sums(&s.x, &mut sums) - s.y);
            m.w0 -= lr * err2;
            for i in (0..n).filter(|&i| s.x.bit(i) == 1) {
                m.w[i] -= lr * (err2 + l2 * m.w[i]);
                let vi = &mut m.v[i];
                for f in 0..cfg.kappa {
                    let grad = err2 * (sums[f] - vi[f]);
                    vi[f] -= lr * (grad + l2 * vi[f]);
                }
            }
        }
        let loss = mse(&m, &scaled);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("training loss became {loss}; lower the learning rate")));
        }
        if loss < best.1 {
            best = (m.clone(), loss);
        }
    }

    // back to original units: y = mean + scale * y_scaled
    let mut out = best.0;
    out.w0 = mean + scale * out.w0;
    out.w.iter_mut().for_each(|w| *w *= scale);
    let root = scale.sqrt();
    out.v.iter_mut().flatten().for_each(|v| *v *= root);
    Ok((out, initial * scale * scale, best.1 * scale * scale))
}

/// Trains on `data`; the report carries training statistics only.
pub fn fm_train(data: &[LabeledSample], cfg: &TrainConfig) -> Result<(FmModel, FitReport)> {
    fm_train_eval(data, &[], cfg)
}

/// Trains on `train` and reports held-out correlation on `test`.
pub fn fm_train_eval(
    train: &[LabeledSample],
    test: &[LabeledSample],
    cfg: &TrainConfig,
) -> Result<(FmModel, FitReport)> {
    cfg.validate()?;
    let n = check_consistent(train)?;
    if !test.is_empty() && check_consistent(test)? != n {
        return Err(Error::LengthMismatch { expected: n, got: test[0].x.len() });
    }
    let (model, initial_loss, train_loss) = sgd(train, n, cfg)?;
    model.validate()?;
    let all: Vec<LabeledSample> = train.iter().chain(test).cloned().collect();
    let report = FitReport {
        train_loss,
        initial_loss,
        n_train: train.len(),
        n_test: test.len(),
        r_train: correlation(&model, train),
        r_test: correlation(&model, test),
        r_all: correlation(&model, &all),
    };
    Ok((model, report))
}
