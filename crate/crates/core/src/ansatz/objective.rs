use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::problem::{Bitstring, IsingModel};
use crate::rng::{seeded, SeededRng};
use crate::sim::{
    apply_readout_noise, expectation_with_diagonal, sample, Circuit, ReadoutNoise, ShotHistogram, Statevector,
};

/// Deflation term added to the energy.
#[derive(Debug, Clone, Default)]
pub(crate) enum Penalty {
    #[default]
    None,
    /// `beta * P(k)` per basis index `k`.
    Basis(Vec<(u64, f64)>),
    /// `beta * |<psi|ref>|^2` per reference state.
    States(Vec<(Statevector, f64)>),
}

pub(crate) enum Sampling<'a> {
    Exact,
    Shots { shots: u64, noise: Option<&'a ReadoutNoise>, rng: Box<SeededRng> },
}

/// One estimate of the penalized objective at a parameter point. Energies
/// exclude the model offset.
#[derive(Debug, Clone)]
pub(crate) struct Measurement {
    pub energy: f64,
    pub penalty: f64,
    pub histogram: Option<ShotHistogram>,
}

impl Measurement {
    pub fn objective(&self) -> f64 {
        self.energy + self.penalty
    }
}

/// Evaluates a fixed circuit's penalized energy; owns its scratch state and
/// shot RNG so independent restarts never share mutable state.
pub(crate) struct Evaluator<'a> {
    circuit: &'a Circuit,
    diag: &'a [f64],
    penalty: &'a Penalty,
    sampling: Sampling<'a>,
    zero: Statevector,
    psi: Statevector,
    pub evals: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(circuit: &'a Circuit, diag: &'a [f64], penalty: &'a Penalty, sampling: Sampling<'a>) -> Result<Self> {
        let n = circuit.n_qubits();
        if diag.len() != 1usize << n {
            return Err(Error::LengthMismatch { expected: 1usize << n, got: diag.len() });
        }
        match penalty {
            Penalty::None => {}
            Penalty::Basis(entries) => {
                if let Some((k, _)) = entries.iter().find(|(k, _)| *k >> n != 0) {
                    return Err(Error::InvalidParameter(format!("penalized index {k} exceeds {n} qubits")));
                }
            }
            Penalty::States(refs) => {
                if let Some((r, _)) = refs.iter().find(|(r, _)| r.n_qubits() != n) {
                    return Err(Error::LengthMismatch { expected: n, got: r.n_qubits() });
                }
            }
        }
        if let Sampling::Shots { shots, noise, .. } = &sampling {
            if *shots == 0 {
                return Err(Error::InvalidParameter("shots must be at least 1".into()));
            }
            if let Some(noise) = noise {
                if noise.n_qubits() != n {
                    return Err(Error::LengthMismatch { expected: n, got: noise.n_qubits() });
                }
            }
        }
        let zero = Statevector::zero_state(n)?;
        Ok(Evaluator { circuit, diag, penalty, sampling, psi: zero.clone(), zero, evals: 0 })
    }

    pub fn state(&self) -> &Statevector {
        &self.psi
    }

    fn prepare(&mut self, params: &[f64]) -> Result<()> {
        self.psi.clone_from(&self.zero);
        self.circuit.apply(params, &mut self.psi)
    }

    pub fn measure(&mut self, params: &[f64]) -> Result<Measurement> {
        self.evals += 1;
        self.prepare(params)?;
        let m = match &mut self.sampling {
            Sampling::Exact => {
                let energy = expectation_with_diagonal(self.diag, &self.psi)?;
                let penalty = match self.penalty {
                    Penalty::None => 0.0,
                    Penalty::Basis(entries) => entries.iter().map(|(k, b)| b * self.psi.probability(*k)).sum(),
                    Penalty::States(refs) => {
                        let mut acc = 0.0;
                        for (r, b) in refs {
                            acc += b * self.psi.overlap(r)?;
                        }
                        acc
                    }
                };
                Measurement { energy, penalty, histogram: None }
            }
            Sampling::Shots { shots, noise, rng } => {
                let mut hist = sample(&self.psi, *shots, rng)?;
                if let Some(noise) = noise {
                    hist = apply_readout_noise(&hist, noise, rng)?;
                }
                let energy = hist.mean_energy_with_diagonal(self.diag)?;
                let penalty = match self.penalty {
                    Penalty::None => 0.0,
                    Penalty::Basis(entries) => entries.iter().map(|(k, b)| b * hist.frequency(*k)).sum(),
                    Penalty::States(refs) => {
                        let mut acc = 0.0;
                        for (r, b) in refs {
                            acc += b * swap_test_estimate(self.psi.overlap(r)?, *shots, rng)?;
                        }
                        acc
                    }
                };
                Measurement { energy, penalty, histogram: Some(hist) }
            }
        };
        Ok(m)
    }

    /// Objective for the optimizers; errors are reported as NaN, which both
    /// minimizers turn into a divergence error.
    pub fn objective(&mut self, params: &[f64]) -> f64 {
        self.measure(params).map_or(f64::NAN, |m| m.objective())
    }

    /// Most likely outcome of the last prepared state.
    pub fn top_of(&self, m: &Measurement) -> (Bitstring, f64) {
        match &m.histogram {
            Some(h) => h.most_frequent().expect("histograms hold at least one shot"),
            None => self.psi.most_probable(),
        }
    }
}

/// Destructive swap-test estimate of `|<a|b>|^2`: the ancilla-free test
/// succeeds with probability `(1 + overlap) / 2`, so the estimate is
/// `2 * successes / shots - 1`, clamped to `[0, 1]`.
pub fn swap_test_estimate<R: Rng + ?Sized>(overlap: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if !(0.0..=1.0 + 1e-9).contains(&overlap) {
        return Err(Error::InvalidParameter(format!("overlap {overlap} outside [0, 1]")));
    }
    let p = ((1.0 + overlap) / 2.0).min(1.0);
    let dist = Binomial::new(shots, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let successes = dist.sample(rng) as f64;
    Ok((2.0 * successes / shots as f64 - 1.0).clamp(0.0, 1.0))
}

/// Number of random bitstrings used to estimate the energy range of models
/// too large to enumerate.
pub const RANGE_SAMPLES: usize = 4096;
/// Largest model whose energy range is computed exactly.
pub const EXACT_RANGE_QUBITS: usize = 16;

/// `(min, max)` of the diagonal energy including the offset; exact up to
/// [`EXACT_RANGE_QUBITS`], otherwise over [`RANGE_SAMPLES`] seeded draws.
pub fn energy_range(m: &IsingModel, seed: u64) -> Result<(f64, f64)> {
    let n = m.n();
    let fold = |acc: (f64, f64), e: f64| (acc.0.min(e), acc.1.max(e));
    let init = (f64::INFINITY, f64::NEG_INFINITY);
    let (lo, hi) = if n <= EXACT_RANGE_QUBITS {
        (0..1u64 << n).map(|k| m.diag_energy(k)).fold(init, fold)
    } else {
        let mut rng = seeded(seed);
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        (0..RANGE_SAMPLES).map(|_| m.diag_energy(rng.random::<u64>() & mask)).fold(init, fold)
    };
    Ok((lo + m.offset(), hi + m.offset()))
}
