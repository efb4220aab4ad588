use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Statevector;
use crate::error::{Error, Result};
use crate::problem::{index_to_string, Bitstring, IsingModel};

/// Counts of measured basis states. Keys are basis indices; the JSON form is
/// `{bitstring: count}` with bitstrings in variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotHistogram {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl ShotHistogram {
    pub fn new(n_qubits: usize) -> Self {
        ShotHistogram { n_qubits, shots: 0, counts: BTreeMap::new() }
    }

    pub fn from_counts(n_qubits: usize, counts: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut h = ShotHistogram::new(n_qubits);
        for (k, c) in counts {
            h.record(k, c)?;
        }
        Ok(h)
    }

    pub fn record(&mut self, index: u64, count: u64) -> Result<()> {
        if self.n_qubits < 64 && index >> self.n_qubits != 0 {
            return Err(Error::InvalidParameter(format!("outcome {index} out of range for {} qubits", self.n_qubits)));
        }
        if count > 0 {
            *self.counts.entry(index).or_default() += count;
            self.shots += count;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn frequency(&self, index: u64) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.count(index) as f64 / self.shots as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let total = self.shots as f64;
        self.counts.iter().map(move |(&k, &c)| (k, c as f64 / total))
    }

    /// Most frequent outcome; ties go to the lower index.
    pub fn most_frequent(&self) -> Option<(Bitstring, f64)> {
        let (&k, &c) = self.counts.iter().fold(None::<(&u64, &u64)>, |best, kv| match best {
            Some(b) if b.1 >= kv.1 => Some(b),
            _ => Some(kv),
        })?;
        Some((Bitstring::from_index(k, self.n_qubits).ok()?, c as f64 / self.shots as f64))
    }

    /// Sample mean of the diagonal energy (offset excluded).
    pub fn mean_energy(&self, m: &IsingModel) -> Result<f64> {
        self.mean_with(|k| m.diag_energy(k), m.n())
    }

    pub fn mean_energy_with_diagonal(&self, diag: &[f64]) -> Result<f64> {
        if diag.len() != 1usize << self.n_qubits {
            return Err(Error::LengthMismatch { expected: 1usize << self.n_qubits, got: diag.len() });
        }
        self.mean_with(|k| diag[k as usize], self.n_qubits)
    }

    fn mean_with(&self, energy: impl Fn(u64) -> f64, n: usize) -> Result<f64> {
        if n != self.n_qubits {
            return Err(Error::LengthMismatch { expected: n, got: self.n_qubits });
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("empty histogram".into()));
        }
        let sum: f64 = self.counts.iter().map(|(&k, &c)| c as f64 * energy(k)).sum();
        Ok(sum / self.shots as f64)
    }
}

impl Serialize for ShotHistogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.counts.len()))?;
        for (&k, &c) in &self.counts {
            map.serialize_entry(&index_to_string(k, self.n_qubits), &c)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ShotHistogram {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, u64>::deserialize(deserializer)?;
        let mut n = None;
        let mut counts = Vec::with_capacity(raw.len());
        for (key, c) in raw {
            let b: Bitstring = key.parse().map_err(serde::de::Error::custom)?;
            if *n.get_or_insert(b.len()) != b.len() {
                return Err(serde::de::Error::custom("histogram keys have different lengths"));
            }
            counts.push((b.index(), c));
        }
        ShotHistogram::from_counts(n.unwrap_or(0), counts).map_err(serde::de::Error::custom)
    }
}

/// Draws `shots` i.i.d. outcomes from `|a_k|^2` as one multinomial sample,
/// built from the conditional binomials `n_k ~ Bin(remaining, p_k / mass)`.
pub fn sample<R: Rng + ?Sized>(psi: &Statevector, shots: u64, rng: &mut R) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let probs = psi.probabilities();
    let mut mass: f64 = probs.iter().sum();
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut remaining = shots;
    let mut counts = Vec::new();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let c = if k == last {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng)
        };
        if c > 0 {
            counts.push((k as u64, c));
        }
        remaining -= c;
        mass -= p;
    }
    ShotHistogram::from_counts(psi.n_qubits(), counts)
}
