use rand::seq::SliceRandom;

use super::model::FmModel;
use super::train::{fm_train_eval, FitReport, TrainConfig};
use crate::error::{Error, Result};
use crate::problem::{distinct_groups, LabeledSample};
use crate::rng;

/// Default correlation threshold for stopping the loop.
pub const DEFAULT_R_THRESHOLD: f64 = 0.85;

/// Order in which pool samples are added to the training set: single-group
/// structures form the seed set; the rest follow stratum by stratum (two,
/// then three, then four distinct groups), shuffled within each stratum.
pub fn acquisition_order(pool: &[LabeledSample], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); 5];
    for (i, s) in pool.iter().enumerate() {
        let g = distinct_groups(&s.x)?;
        strata[g.min(4)].push(i);
    }
    let seed_set = std::mem::take(&mut strata[1]);
    let mut rng = rng::seeded(seed);
    let mut rest = Vec::with_capacity(pool.len() - seed_set.len());
    for stratum in strata.iter_mut().skip(2) {
        stratum.shuffle(&mut rng);
        rest.extend_from_slice(stratum);
    }
    Ok((seed_set, rest))
}

/// One round of the loop: its training-set size and fit statistics.
pub type RoundReport = FitReport;

/// Retrains with `batch` more samples per round until held-out R reaches
/// `r_threshold` or the pool is exhausted.
///
/// Round `r` trains on the seed set plus the first `r * batch` samples of
/// [`acquisition_order`] and evaluates on everything not yet added. If the
/// threshold is never reached, the model with the best held-out R is
/// returned.
pub fn active_learning_loop(
    pool: &[LabeledSample],
    batch: usize,
    r_threshold: f64,
    cfg: &TrainConfig,
) -> Result<(FmModel, Vec<RoundReport>)> {
    if batch == 0 {
        return Err(Error::InvalidParameter("batch must be at least 1".into()));
    }
    if r_threshold.is_nan() || r_threshold <= 0.0 {
        return Err(Error::InvalidParameter(format!("R threshold {r_threshold} must be positive")));
    }
    let (seed_set, rest) = acquisition_order(pool, cfg.seed)?;
    if seed_set.is_empty() {
        return Err(Error::InvalidParameter(
            "pool contains no single-group structures to seed the training set".into(),
        ));
    }

    let mut reports = Vec::new();
    let mut best: Option<(FmModel, f64)> = None;
    let mut added = 0;
    loop {
        added = (added + batch).min(rest.len());
        let train: Vec<LabeledSample> = seed_set.iter().chain(&rest[..added]).map(|&i| pool[i].clone()).collect();
        let test: Vec<LabeledSample> = rest[added..].iter().map(|&i| pool[i].clone()).collect();
        let (model, report) = fm_train_eval(&train, &test, cfg)?;
        let r = report.r_test;
        reports.push(report);
        if let Some(r) = r {
            if r >= r_threshold {
                return Ok((model, reports));
            }
        }
        let score = r.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((model, score));
        }
        if added == rest.len() {
            break;
        }
    }
    Ok((best.expect("at least one round ran").0, reports))
}
