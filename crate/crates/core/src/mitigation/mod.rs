//! Readout-error mitigation on the observed-bitstring subspace.
//!
//! The full confusion matrix is the tensor product of per-qubit 2x2
//! matrices. It is never stored: entries between two observed bitstrings
//! are formed on demand, and the restricted system is solved iteratively.

mod gmres;
mod quasi;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::IsingModel;
use crate::sim::{QubitReadout, ReadoutNoise, ShotHistogram};

pub use quasi::{project_to_simplex, total_variation, QuasiDistribution};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Largest subspace for which a dense LU solve backs up the iterative one.
pub const DENSE_FALLBACK_MAX: usize = 1024;

/// Per-qubit confusion matrices `A_q[r][t] = P(read r | true t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ConfusionSpec {
    qubits: Vec<QubitReadout>,
}

#[derive(Deserialize)]
struct RawSpec {
    qubits: Vec<QubitReadout>,
}

impl TryFrom<RawSpec> for ConfusionSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        ConfusionSpec::new(raw.qubits)
    }
}

impl From<&ReadoutNoise> for ConfusionSpec {
    fn from(noise: &ReadoutNoise) -> Self {
        ConfusionSpec { qubits: noise.qubits.clone() }
    }
}

impl ConfusionSpec {
    /// Flip probabilities must be below 1/2 so every diagonal entry dominates.
    pub fn new(qubits: Vec<QubitReadout>) -> Result<Self> {
        for (q, r) in qubits.iter().enumerate() {
            for p in [r.p10, r.p01] {
                if !(0.0..0.5).contains(&p) {
                    return Err(Error::InvalidParameter(format!("qubit {q}: flip probability {p} not in [0, 0.5)")));
                }
            }
        }
        Ok(ConfusionSpec { qubits })
    }

    pub fn identity(n_qubits: usize) -> Self {
        ConfusionSpec { qubits: vec![QubitReadout { p10: 0.0, p01: 0.0 }; n_qubits] }
    }

    pub fn uniform(n_qubits: usize, p: f64) -> Result<Self> {
        Self::new(vec![QubitReadout { p10: p, p01: p }; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitReadout] {
        &self.qubits
    }

    /// `P(read r | true t)` for whole registers.
    pub fn entry(&self, read: u64, truth: u64) -> f64 {
        let mut v = 1.0;
        for (q, a) in self.qubits.iter().enumerate() {
            let (r, t) = ((read >> q) & 1, (truth >> q) & 1);
            v *= match (r, t) {
                (0, 0) => 1.0 - a.p10,
                (1, 0) => a.p10,
                (0, _) => a.p01,
                _ => 1.0 - a.p01,
            };
        }
        v
    }
}

/// Corrects `hist` by solving `A_S x = p_S`, where `S` is the set of observed
/// bitstrings and `A_S` the confusion matrix restricted to it. The solution
/// is rescaled to unit sum.
pub fn mitigate(hist: &ShotHistogram, spec: &ConfusionSpec, tol: f64) -> Result<QuasiDistribution> {
    if hist.shots() == 0 {
        return Err(Error::InvalidParameter("cannot mitigate an empty histogram".into()));
    }
    if spec.n_qubits() != hist.n_qubits() {
        return Err(Error::LengthMismatch { expected: hist.n_qubits(), got: spec.n_qubits() });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let keys: Vec<u64> = hist.counts().keys().copied().collect();
    let p: Vec<f64> = keys.iter().map(|&k| hist.frequency(k)).collect();
    let matvec = |x: &[f64], out: &mut [f64]| {
        for (i, &r) in keys.iter().enumerate() {
            out[i] = keys.iter().zip(x).map(|(&t, xv)| spec.entry(r, t) * xv).sum();
        }
    };
    let diag: Vec<f64> = keys.iter().map(|&k| spec.entry(k, k)).collect();
    let cap = 10 * keys.len();
    let x = match gmres::solve(matvec, &p, &diag, tol, cap) {
        Ok(x) => x,
        Err(Error::NotConverged { .. }) if keys.len() <= DENSE_FALLBACK_MAX => {
            let a = DMatrix::from_fn(keys.len(), keys.len(), |i, j| spec.entry(keys[i], keys[j]));
            let b = DVector::from_column_slice(&p);
            let sol = a.lu().solve(&b).ok_or(Error::NotConverged { iterations: cap, residual: f64::NAN })?;
            sol.iter().copied().collect()
        }
        Err(e) => return Err(e),
    };
    let total: f64 = x.iter().sum();
    if !total.is_finite() || total.abs() < f64::EPSILON {
        return Err(Error::NonFinite(format!("mitigated weights sum to {total}")));
    }
    let weights: BTreeMap<u64, f64> = keys.into_iter().zip(x).map(|(k, w)| (k, w / total)).collect();
    QuasiDistribution::new(hist.n_qubits(), weights)
}

/// `sum_k w_k E_k` over the quasi-distribution, offset excluded.
pub fn mitigated_expectation(m: &IsingModel, q: &QuasiDistribution) -> Result<f64> {
    if q.n_qubits() != m.n() {
        return Err(Error::LengthMismatch { expected: m.n(), got: q.n_qubits() });
    }
    Ok(q.iter().map(|(k, w)| w * m.diag_energy(k)).sum())
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_is_a_fixpoint() {
        let h = ShotHistogram::from_counts(3, [(0, 5), (3, 10), (7, 25)]).unwrap();
        let q = mitigate(&h, &ConfusionSpec::identity(3), DEFAULT_TOL).unwrap();
        for (k, f) in h.frequencies() {
            assert!((q.weight(k) - f).abs() < 1e-15);
        }
    }

    #[test]
    fn single_observation_gets_full_weight() {
        let h = ShotHistogram::from_counts(4, [(9, 17)]).unwrap();
        let q = mitigate(&h, &ConfusionSpec::uniform(4, 0.1).unwrap(), DEFAULT_TOL).unwrap();
        assert!((q.weight(9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn restricted_solve_equals_full_dense_solve_on_full_support() {
        let mut rng = seeded(11);
        for n in 1..=6usize {
            let qubits = (0..n)
                .map(|_| QubitReadout { p10: rng.random_range(0.0..0.2), p01: rng.random_range(0.0..0.2) })
                .collect();
            let spec = ConfusionSpec::new(qubits).unwrap();
            let dim = 1usize << n;
            let counts: Vec<(u64, u64)> = (0..dim as u64).map(|k| (k, rng.random_range(1..1000))).collect();
            let h = ShotHistogram::from_counts(n, counts).unwrap();
            let q = mitigate(&h, &spec, 1e-12).unwrap();
            let a = DMatrix::from_fn(dim, dim, |i, j| spec.entry(i as u64, j as u64));
            let p = DVector::from_iterator(dim, (0..dim as u64).map(|k| h.frequency(k)));
            let full = a.lu().solve(&p).unwrap();
            for k in 0..dim {
                assert!((q.weight(k as u64) - full[k]).abs() < 1e-6, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn confusion_validation() {
        assert!(ConfusionSpec::uniform(2, 0.5).is_err());
        assert!(ConfusionSpec::uniform(2, -0.1).is_err());
        let spec: ConfusionSpec = serde_json::from_str(r#"{"qubits":[{"p10":0.01,"p01":0.02}]}"#).unwrap();
        assert_eq!(spec.entry(1, 0), 0.01);
        assert_eq!(spec.entry(0, 1), 0.02);
        assert!(serde_json::from_str::<ConfusionSpec>(r#"{"qubits":[{"p10":0.7,"p01":0.0}]}"#).is_err());
    }

    #[test]
    fn expectation_of_point_mass() {
        let m = IsingModel::new(vec![0.5, -1.0], [(0, 1, 2.0)], 0.0).unwrap();
        let q = QuasiDistribution::new(2, BTreeMap::from([(2u64, 1.0)])).unwrap();
        assert_eq!(mitigated_expectation(&m, &q).unwrap(), m.diag_energy(2));
    }
}
