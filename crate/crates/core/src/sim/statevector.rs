use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Bitstring, IsingModel, MAX_ENUMERATION_QUBITS};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense amplitude vector, little-endian: qubit 0 is the least significant
/// bit of the basis index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > MAX_ENUMERATION_QUBITS {
            return Err(Error::Capacity { what: "statevector", n: n_qubits, max: MAX_ENUMERATION_QUBITS });
        }
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index as usize] = ONE;
        Ok(Statevector { n_qubits, amps })
    }

    pub fn from_bitstring(x: &Bitstring) -> Result<Self> {
        Self::basis_state(x.len(), x.index())
    }

    /// Equal superposition over all basis states.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        let mut s = Self::zero_state(n_qubits)?;
        let a = Complex64::new((s.amps.len() as f64).sqrt().recip(), 0.0);
        s.amps.iter_mut().for_each(|v| *v = a);
        Ok(s)
    }

    /// Wraps raw amplitudes, normalizing them. The length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_ENUMERATION_QUBITS {
            return Err(Error::Capacity { what: "statevector", n: n_qubits, max: MAX_ENUMERATION_QUBITS });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite("amplitude norm".into()));
        }
        Ok(Statevector { n_qubits, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amps.get(index as usize).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_dim(other.n_qubits)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Most probable basis state and its probability; ties go to the lower index.
    pub fn most_probable(&self) -> (Bitstring, f64) {
        let (idx, p) = self
            .amps
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
        (Bitstring::from_index(idx as u64, self.n_qubits).expect("index fits register"), p)
    }

    pub(crate) fn check_dim(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::LengthMismatch { expected: n_qubits, got: self.n_qubits });
        }
        Ok(())
    }
}

/// `sum_k |a_k|^2 E_k` over a precomputed diagonal (offset excluded).
pub fn expectation_with_diagonal(diag: &[f64], psi: &Statevector) -> Result<f64> {
    if diag.len() != psi.dim() {
        return Err(Error::LengthMismatch { expected: diag.len(), got: psi.dim() });
    }
    Ok(psi.amps.iter().zip(diag).map(|(a, e)| a.norm_sqr() * e).sum())
}

/// `<psi|H|psi>` for a diagonal Ising Hamiltonian, offset excluded.
pub fn diag_expectation(m: &IsingModel, psi: &Statevector) -> Result<f64> {
    psi.check_dim(m.n())?;
    Ok(psi.amps.iter().enumerate().map(|(k, a)| a.norm_sqr() * m.diag_energy(k as u64)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_energy_is_its_diagonal_entry() {
        let m = IsingModel::new(vec![0.5, -1.0, 0.25], [(0, 2, 0.75)], 3.0).unwrap();
        for k in 0..8 {
            let psi = Statevector::basis_state(3, k).unwrap();
            assert!((diag_expectation(&m, &psi).unwrap() - m.diag_energy(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_zz_expectation_vanishes() {
        let m = IsingModel::new(vec![0.0, 0.0], [(0, 1, 1.0)], 0.0).unwrap();
        let psi = Statevector::uniform(2).unwrap();
        assert!(diag_expectation(&m, &psi).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let m = IsingModel::new(vec![0.0; 3], [], 0.0).unwrap();
        let psi = Statevector::zero_state(2).unwrap();
        assert!(diag_expectation(&m, &psi).is_err());
        assert!(expectation_with_diagonal(&[0.0; 8], &psi).is_err());
    }

    #[test]
    fn most_probable_prefers_largest_weight() {
        let psi = Statevector::from_amplitudes(vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, 0.9),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let (b, p) = psi.most_probable();
        assert_eq!(b.index(), 1);
        assert!(p > 0.8);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
