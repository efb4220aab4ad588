use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Bitstring, QuboModel, Sense};
use crate::error::{Error, Result};

/// Largest register for which the full diagonal is materialized.
pub const MAX_ENUMERATION_QUBITS: usize = 24;

/// Diagonal Hamiltonian `sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j + offset`.
///
/// Built from a QUBO under `q = (1 - z) / 2`, so bit 1 is the `-1`
/// eigenvalue of `Z`. Models converted from a maximization problem are
/// negated internally (`negated == true`); [`IsingModel::score`] maps an
/// internal energy back to the original objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    n: usize,
    h: Vec<f64>,
    /// Dense upper triangle, `j[a * n + b]` for `a < b`.
    j: Vec<f64>,
    offset: f64,
    negated: bool,
}

impl IsingModel {
    pub fn new(h: Vec<f64>, couplings: impl IntoIterator<Item = (usize, usize, f64)>, offset: f64) -> Result<Self> {
        let n = h.len();
        let mut j = vec![0.0; n * n];
        for (a, b, v) in couplings {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("coupling ({a}, {b}) invalid for n = {n}")));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            j[a * n + b] += v;
        }
        if !(h.iter().all(|v| v.is_finite()) && j.iter().all(|v| v.is_finite()) && offset.is_finite()) {
            return Err(Error::NonFinite("Ising coefficient".into()));
        }
        Ok(IsingModel { n, h, j, offset, negated: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if a == b {
            return 0.0;
        }
        self.j[a * self.n + b]
    }

    /// Non-zero couplings with `a < b`, row-major.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b, self.j[a * n + b]))).filter(|&(_, _, v)| v != 0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// Converts an internal energy (offset included) to the user-facing score.
    pub fn score(&self, energy: f64) -> f64 {
        if self.negated {
            -energy
        } else {
            energy
        }
    }

    /// `sum h_i z_i + sum J_ij z_i z_j` for explicit spins, offset excluded.
    pub fn spin_energy(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: z.len() });
        }
        let mut e = 0.0;
        for a in 0..self.n {
            e += self.h[a] * z[a];
            let row = &self.j[a * self.n..(a + 1) * self.n];
            for b in a + 1..self.n {
                e += row[b] * z[a] * z[b];
            }
        }
        Ok(e)
    }

    /// Diagonal energy of basis state `index`, offset excluded.
    #[inline]
    pub fn diag_energy(&self, index: u64) -> f64 {
        let n = self.n;
        let spin = |i: usize| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for a in 0..n {
            let za = spin(a);
            let mut field = self.h[a];
            let row = &self.j[a * n..(a + 1) * n];
            for (b, &jab) in row.iter().enumerate().skip(a + 1) {
                if jab != 0.0 {
                    field += jab * spin(b);
                }
            }
            e += za * field;
        }
        e
    }

    /// Energy of a bitstring including the offset.
    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        x.ensure_len(self.n)?;
        Ok(self.diag_energy(x.index()) + self.offset)
    }

    /// All `2^n` diagonal energies (offset excluded), indexed by basis state.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        if self.n > MAX_ENUMERATION_QUBITS {
            return Err(Error::Capacity { what: "Ising model", n: self.n, max: MAX_ENUMERATION_QUBITS });
        }
        let dim = 1usize << self.n;
        let mut diag = vec![0.0; dim];
        diag.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let base = (c * 4096) as u64;
            for (k, e) in chunk.iter_mut().enumerate() {
                *e = self.diag_energy(base + k as u64);
            }
        });
        Ok(diag)
    }
}

/// Maps a QUBO onto spins with `q_i = (1 - z_i) / 2`.
///
/// Maximization problems are negated first so that the ground state of the
/// returned model is the maximizer.
pub fn qubo_to_ising(m: &QuboModel) -> IsingModel {
    let negated = m.sense() == Sense::Maximize;
    let q = if negated { m.negated() } else { m.clone() };
    let n = q.n();
    let mut h: Vec<f64> = q.linear().iter().map(|v| -v / 2.0).collect();
    let mut offset = q.w0() + q.linear().iter().sum::<f64>() / 2.0;
    let mut j = vec![0.0; n * n];
    for (a, b, v) in q.pairs() {
        j[a * n + b] = v / 4.0;
        h[a] -= v / 4.0;
        h[b] -= v / 4.0;
        offset += v / 4.0;
    }
    IsingModel { n, h, j, offset, negated }
}
