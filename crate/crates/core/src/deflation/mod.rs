//! Excited-state search by deflation.
//!
//! VQD penalizes overlap with previously optimized states. The
//! computational-basis variant (cVQD) penalizes the probability of measuring
//! previously found basis states, which is read directly off the same shots
//! that estimate the energy.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::vqe::run_penalized;
use crate::ansatz::{
    build_ansatz, energy_range, swap_test_estimate, AnsatzSpec, Backend, OptimizerConfig, Penalty, SampledBackend,
    VqeResult,
};
use crate::error::{Error, Result};
use crate::problem::{Bitstring, IsingModel};
use crate::rng::derive_seed;
use crate::sim::{apply_circuit, diag_expectation, Circuit, ShotHistogram, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeflationMode {
    Vqd,
    Cvqd,
}

/// Penalty weight given to every ledger entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum BetaPolicy {
    /// `factor * (E_max - E_min)` from [`energy_range`].
    Auto {
        factor: f64,
    },
    Fixed {
        beta: f64,
    },
}

impl Default for BetaPolicy {
    fn default() -> Self {
        BetaPolicy::Auto { factor: 2.0 }
    }
}

impl BetaPolicy {
    pub fn beta(&self, m: &IsingModel, seed: u64) -> Result<f64> {
        let beta = match *self {
            BetaPolicy::Auto { factor } => {
                if !(factor > 0.0 && factor.is_finite()) {
                    return Err(Error::InvalidParameter(format!("beta factor must be positive, got {factor}")));
                }
                let (lo, hi) = energy_range(m, seed)?;
                factor * (hi - lo)
            }
            BetaPolicy::Fixed { beta } => beta,
        };
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub bitstring: Bitstring,
    pub beta: f64,
    pub energy: f64,
}

/// Found levels in discovery order; bitstrings are pairwise distinct.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeflationLedger {
    entries: Vec<LedgerEntry>,
}

impl DeflationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bitstring: Bitstring, beta: f64, energy: f64) -> Result<()> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if let Some(first) = self.entries.first() {
            bitstring.ensure_len(first.bitstring.len())?;
        }
        if self.contains(&bitstring) {
            return Err(Error::InvalidParameter(format!("{bitstring} is already in the ledger")));
        }
        self.entries.push(LedgerEntry { bitstring, beta, energy });
        Ok(())
    }

    pub fn contains(&self, x: &Bitstring) -> bool {
        self.entries.iter().any(|e| e.bitstring == *x)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check(&self, n: usize) -> Result<()> {
        for e in &self.entries {
            e.bitstring.ensure_len(n)?;
        }
        Ok(())
    }

    pub(crate) fn basis_penalty(&self) -> Penalty {
        Penalty::Basis(self.entries.iter().map(|e| (e.bitstring.index(), e.beta)).collect())
    }
}

/// What the cVQD penalty is read from.
#[derive(Debug, Clone, Copy)]
pub enum Observation<'a> {
    State(&'a Statevector),
    Shots(&'a ShotHistogram),
}

/// `<H> + sum_e beta_e P(e)`, including the model offset. `P` is `|alpha|^2`
/// for a state and the observed frequency for a histogram.
pub fn cvqd_objective(m: &IsingModel, obs: Observation<'_>, ledger: &DeflationLedger) -> Result<f64> {
    ledger.check(m.n())?;
    let (energy, prob): (f64, Box<dyn Fn(u64) -> f64 + '_>) = match obs {
        Observation::State(psi) => (diag_expectation(m, psi)?, Box::new(|k| psi.probability(k))),
        Observation::Shots(h) => (h.mean_energy(m)?, Box::new(|k| h.frequency(k))),
    };
    let penalty: f64 = ledger.entries.iter().map(|e| e.beta * prob(e.bitstring.index())).sum();
    Ok(energy + m.offset() + penalty)
}

/// `<H> + sum_r beta_r |<psi|r>|^2`, including the model offset. With
/// `shots`, each overlap is a simulated destructive swap test.
pub fn vqd_objective<R: Rng + ?Sized>(
    m: &IsingModel,
    psi: &Statevector,
    refs: &[(Statevector, f64)],
    shots: Option<u64>,
    rng: &mut R,
) -> Result<f64> {
    let mut total = diag_expectation(m, psi)? + m.offset();
    for (r, beta) in refs {
        let overlap = psi.overlap(r)?;
        total += beta
            * match shots {
                Some(s) => swap_test_estimate(overlap, s, rng)?,
                None => overlap,
            };
    }
    Ok(total)
}

/// Retries per level after the optimizer lands on an already-found state.
pub const MAX_LEVEL_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub rank: usize,
    /// Penalty weight of this level's own ledger entry.
    pub beta: f64,
    pub attempts: usize,
    pub result: VqeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationResult {
    pub mode: DeflationMode,
    /// Ground state first, then each accepted excited level.
    pub levels: Vec<LevelRecord>,
    pub ledger: DeflationLedger,
    /// Level whose every attempt collided with the ledger, if any; the
    /// search stops there.
    pub failed_level: Option<usize>,
}

impl DeflationResult {
    pub fn bitstrings(&self) -> impl Iterator<Item = &Bitstring> {
        self.levels.iter().map(|l| &l.result.top_bitstring)
    }
}

/// Stepwise deflation: each call to [`Deflator::step`] searches one more
/// level against the ledger of those already found. Every level starts from
/// fresh random parameters with seeds derived from the level and attempt
/// number.
pub struct Deflator<'a> {
    m: &'a IsingModel,
    spec: AnsatzSpec,
    opt: OptimizerConfig,
    backend: Backend,
    mode: DeflationMode,
    beta: f64,
    circuit: Circuit,
    ledger: DeflationLedger,
    refs: Vec<(Statevector, f64)>,
    levels: Vec<LevelRecord>,
    failed_level: Option<usize>,
}

impl<'a> Deflator<'a> {
    pub fn new(
        m: &'a IsingModel,
        spec: &AnsatzSpec,
        opt: &OptimizerConfig,
        backend: &Backend,
        mode: DeflationMode,
        beta_policy: &BetaPolicy,
    ) -> Result<Self> {
        opt.validate()?;
        let beta = beta_policy.beta(m, opt.seed)?;
        let circuit = build_ansatz(spec, m)?;
        Ok(Deflator {
            m,
            spec: *spec,
            opt: *opt,
            backend: backend.clone(),
            mode,
            beta,
            circuit,
            ledger: DeflationLedger::new(),
            refs: Vec::new(),
            levels: Vec::new(),
            failed_level: None,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn failed_level(&self) -> Option<usize> {
        self.failed_level
    }

    /// Searches the next level. Returns `None` once a level has failed with
    /// every attempt colliding with the ledger; no further levels are tried.
    pub fn step(&mut self) -> Result<Option<&LevelRecord>> {
        if self.failed_level.is_some() {
            return Ok(None);
        }
        let level = self.levels.len();
        let penalty = match (level, self.mode) {
            (0, _) => Penalty::None,
            (_, DeflationMode::Cvqd) => self.ledger.basis_penalty(),
            (_, DeflationMode::Vqd) => Penalty::States(self.refs.clone()),
        };
        for attempt in 0..MAX_LEVEL_ATTEMPTS {
            let tag = (level as u64) << 16 | attempt as u64;
            let opt = OptimizerConfig { seed: derive_seed(self.opt.seed, tag), ..self.opt };
            let backend = match &self.backend {
                Backend::Exact => Backend::Exact,
                Backend::Sampled(s) => Backend::Sampled(SampledBackend { seed: derive_seed(s.seed, tag), ..s.clone() }),
            };
            let result = run_penalized(self.m, &self.spec, &opt, &backend, &penalty, None)?;
            if self.ledger.contains(&result.top_bitstring) {
                continue;
            }
            self.ledger.push(result.top_bitstring, self.beta, result.energy)?;
            if self.mode == DeflationMode::Vqd {
                let zero = Statevector::zero_state(self.m.n())?;
                self.refs.push((apply_circuit(&self.circuit, &result.params, &zero)?, self.beta));
            }
            self.levels.push(LevelRecord { rank: level, beta: self.beta, attempts: attempt + 1, result });
            return Ok(self.levels.last());
        }
        self.failed_level = Some(level);
        Ok(None)
    }

    pub fn finish(self) -> DeflationResult {
        DeflationResult { mode: self.mode, levels: self.levels, ledger: self.ledger, failed_level: self.failed_level }
    }
}

/// Ground state plus `k` excited levels; see [`Deflator`].
pub fn deflate(
    m: &IsingModel,
    spec: &AnsatzSpec,
    opt: &OptimizerConfig,
    backend: &Backend,
    k: usize,
    mode: DeflationMode,
    beta_policy: &BetaPolicy,
) -> Result<DeflationResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("deflation needs k >= 1".into()));
    }
    let mut d = Deflator::new(m, spec, opt, backend, mode, beta_policy)?;
    for _ in 0..=k {
        if d.step()?.is_none() {
            break;
        }
    }
    Ok(d.finish())
}

/// Distinct-bitstring check over a result, for callers that merge runs.
pub fn all_distinct<'a>(bits: impl IntoIterator<Item = &'a Bitstring>) -> bool {
    let mut seen = BTreeSet::new();
    bits.into_iter().all(|b| seen.insert(b.index()))
}
