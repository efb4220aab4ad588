//! Synthetic ground truth: a seeded quadratic model over twelve variables
//! whose maximizer is `Me-CN-Me-CN-Me-H` (`110011001110`), and noisy data
//! sets drawn from it.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::problem::{encode_groups, Bitstring, GroupCode, LabeledSample, QuboModel, Sense};
use crate::rng;

/// Seed of the model shipped as [`embedded_model`].
pub const EMBEDDED_SEED: u64 = 2023;

/// Variable count of the planted models.
pub const PLANTED_VARIABLES: usize = 12;

/// Rank of the planted pairwise block; small enough for an FM to represent.
const PLANTED_RANK: usize = 4;

/// Baseline of the target column.
const BASELINE: f64 = 285.0;

/// The structure every planted model is built to maximize.
pub fn planted_target() -> Bitstring {
    use GroupCode::*;
    encode_groups(&[Me, CN, Me, CN, Me, H]).expect("six sites fit")
}

/// Exhaustive maximizer of a small QUBO (ties go to the lower index).
fn argmax(m: &QuboModel) -> Bitstring {
    let n = m.n();
    (0..1u64 << n)
        .map(|k| Bitstring::from_index(k, n).unwrap())
        .map(|x| (x, m.energy(&x).unwrap()))
        .fold(None::<(Bitstring, f64)>, |best, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .unwrap()
        .0
}

/// Seeded maximization QUBO with a rank-4 positive semidefinite pairwise
/// block and random linear terms. The linear terms are then tilted toward
/// [`planted_target`] in steps of 0.25 until it becomes the unique
/// maximizer, so every seed puts the optimum at the same structure.
pub fn planted_model(seed: u64) -> QuboModel {
    let n = PLANTED_VARIABLES;
    let mut rng = rng::seeded(seed);
    let factor = Normal::new(0.0, 1.2).unwrap();
    let field = Normal::new(0.0, 6.0).unwrap();
    let v: Vec<Vec<f64>> = (0..n).map(|_| (0..PLANTED_RANK).map(|_| factor.sample(&mut rng)).collect()).collect();
    let linear: Vec<f64> = (0..n).map(|_| field.sample(&mut rng)).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
            pairs.push((i, j, dot));
        }
    }
    let base = QuboModel::new(BASELINE, linear, pairs, Sense::Maximize).expect("finite coefficients");

    let target = planted_target();
    let mut tilt = 0.0;
    loop {
        let mut m = base.clone();
        for (i, w) in m.linear_mut().iter_mut().enumerate() {
            *w += if target.bit(i) == 1 { tilt } else { -tilt };
        }
        let best = argmax(&m);
        if best == target {
            let second = (0..1u64 << n)
                .filter(|&k| k != target.index())
                .map(|k| m.energy(&Bitstring::from_index(k, n).unwrap()).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            if m.energy(&target).unwrap() - second > 1e-6 {
                return m;
            }
        }
        tilt += 0.25;
    }
}

/// The model used by the examples and the acceptance suite.
pub fn embedded_model() -> QuboModel {
    planted_model(EMBEDDED_SEED)
}

/// Every structure of the model's register with target `model(x) + noise`,
/// in basis-index order. Noise is Gaussian with standard deviation
/// `noise_sd`, seeded by `seed`.
pub fn generate_dataset(model: &QuboModel, noise_sd: f64, seed: u64) -> Result<Vec<LabeledSample>> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {noise_sd} must be non-negative")));
    }
    let n = model.n();
    if n > 24 {
        return Err(Error::Capacity { what: "data set register", n, max: 24 });
    }
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, noise_sd).expect("validated");
    (0..1u64 << n)
        .map(|k| {
            let x = Bitstring::from_index(k, n)?;
            let eps = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            LabeledSample::new(x, model.energy(&x)? + eps)
        })
        .collect()
}

/// A random subset of `count` indices out of `len`, seeded.
pub fn random_split(len: usize, count: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = rng::seeded(seed);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..count.min(len) {
        let j = rng.random_range(i..len);
        idx.swap(i, j);
    }
    let rest = idx.split_off(count.min(len));
    (idx, rest)
}
