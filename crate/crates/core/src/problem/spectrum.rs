use serde::{Deserialize, Serialize};

use super::{Bitstring, IsingModel};
use crate::error::{Error, Result};

/// Relative tolerance for grouping degenerate energies into one level.
pub const DEGENERACY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Internal energy, offset included.
    pub energy: f64,
    /// User-facing objective value.
    pub score: f64,
    pub bitstrings: Vec<Bitstring>,
}

/// The lowest energy levels of a diagonal Hamiltonian, degeneracy preserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub levels: Vec<Level>,
}

impl SpectrumSlice {
    pub fn ground_energy(&self) -> f64 {
        self.levels[0].energy
    }

    /// Flattened bitstrings in level order.
    pub fn bitstrings(&self) -> impl Iterator<Item = &Bitstring> {
        self.levels.iter().flat_map(|l| l.bitstrings.iter())
    }

    /// Energy of the `rank`-th state when degenerate states are counted
    /// individually.
    pub fn energy_of_rank(&self, rank: usize) -> Option<f64> {
        let mut seen = 0;
        for l in &self.levels {
            seen += l.bitstrings.len();
            if rank < seen {
                return Some(l.energy);
            }
        }
        None
    }
}

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEGENERACY_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// The `k` lowest distinct levels, found by evaluating every diagonal entry.
pub fn exact_spectrum(m: &IsingModel, k: usize) -> Result<SpectrumSlice> {
    if k == 0 {
        return Err(Error::InvalidParameter("level count must be at least 1".into()));
    }
    let diag = m.diagonal()?;
    let mut order: Vec<u32> = (0..diag.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| diag[a as usize].total_cmp(&diag[b as usize]).then(a.cmp(&b)));

    let mut levels: Vec<Level> = Vec::with_capacity(k);
    let mut anchor = f64::NAN;
    for idx in order {
        let e = diag[idx as usize];
        if levels.is_empty() || !same_level(anchor, e) {
            if levels.len() == k {
                break;
            }
            anchor = e;
            let energy = e + m.offset();
            levels.push(Level { energy, score: m.score(energy), bitstrings: Vec::new() });
        }
        levels.last_mut().unwrap().bitstrings.push(Bitstring::from_index(idx as u64, m.n())?);
    }
    Ok(SpectrumSlice { levels })
}

/// The `count` lowest individual states (degenerate partners counted
/// separately), each with its energy.
pub fn lowest_states(m: &IsingModel, count: usize) -> Result<Vec<(Bitstring, f64)>> {
    let mut out = Vec::with_capacity(count);
    let mut k = count.max(1);
    loop {
        let slice = exact_spectrum(m, k)?;
        out.clear();
        for l in &slice.levels {
            for b in &l.bitstrings {
                out.push((*b, l.energy));
            }
        }
        if out.len() >= count || slice.levels.len() < k {
            out.truncate(count);
            return Ok(out);
        }
        k *= 2;
    }
}
