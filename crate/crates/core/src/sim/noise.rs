use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ShotHistogram;
use crate::error::{Error, Result};

/// Readout flip probabilities of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitReadout {
    /// P(read 1 | true 0).
    pub p10: f64,
    /// P(read 0 | true 1).
    pub p01: f64,
}

/// Independent per-qubit classical bit-flip channel applied at measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise")]
pub struct ReadoutNoise {
    pub qubits: Vec<QubitReadout>,
}

#[derive(Deserialize)]
struct RawNoise {
    qubits: Vec<QubitReadout>,
}

impl TryFrom<RawNoise> for ReadoutNoise {
    type Error = Error;
    fn try_from(raw: RawNoise) -> Result<Self> {
        ReadoutNoise::new(raw.qubits)
    }
}

impl ReadoutNoise {
    pub fn new(qubits: Vec<QubitReadout>) -> Result<Self> {
        for (q, r) in qubits.iter().enumerate() {
            for p in [r.p10, r.p01] {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("qubit {q}: flip probability {p} not in [0, 1)")));
                }
            }
        }
        Ok(ReadoutNoise { qubits })
    }

    pub fn uniform(n_qubits: usize, p: f64) -> Result<Self> {
        Self::new(vec![QubitReadout { p10: p, p01: p }; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_noiseless(&self) -> bool {
        self.qubits.iter().all(|r| r.p10 == 0.0 && r.p01 == 0.0)
    }
}

/// Flips every recorded bit of every shot independently. The deterministic
/// `p = 1` case of the validated `[0, 1)` range is still handled exactly.
pub fn apply_readout_noise<R: Rng + ?Sized>(
    hist: &ShotHistogram,
    noise: &ReadoutNoise,
    rng: &mut R,
) -> Result<ShotHistogram> {
    if noise.n_qubits() != hist.n_qubits() {
        return Err(Error::LengthMismatch { expected: hist.n_qubits(), got: noise.n_qubits() });
    }
    if noise.is_noiseless() {
        return Ok(hist.clone());
    }
    let mut out = ShotHistogram::new(hist.n_qubits());
    for (&index, &count) in hist.counts() {
        for _ in 0..count {
            let mut read = index;
            for (q, r) in noise.qubits.iter().enumerate() {
                let p = if (index >> q) & 1 == 0 { r.p10 } else { r.p01 };
                if p > 0.0 && rng.random::<f64>() < p {
                    read ^= 1 << q;
                }
            }
            out.record(read, 1)?;
        }
    }
    Ok(out)
}
