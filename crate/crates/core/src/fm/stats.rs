use crate::error::{Error, Result};

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson_r(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("correlation of empty sequences".into()));
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mt = truth.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        let (dp, dt) = (p - mp, t - mt);
        sxy += dp * dt;
        sxx += dp * dp;
        syy += dt * dt;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
