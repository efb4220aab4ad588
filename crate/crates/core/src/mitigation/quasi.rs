use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::problem::{index_to_string, Bitstring};

/// Real-valued weights over bitstrings; weights may be negative but sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    n_qubits: usize,
    weights: BTreeMap<u64, f64>,
}

const SUM_TOL: f64 = 1e-6;

impl QuasiDistribution {
    pub fn new(n_qubits: usize, weights: BTreeMap<u64, f64>) -> Result<Self> {
        if let Some(k) = weights.keys().find(|&&k| n_qubits < 64 && k >> n_qubits != 0) {
            return Err(Error::InvalidParameter(format!("index {k} exceeds {n_qubits} qubits")));
        }
        if weights.values().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("quasi-probability weight".into()));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(QuasiDistribution { n_qubits, weights })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weight(&self, index: u64) -> f64 {
        self.weights.get(&index).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    /// Euclidean-nearest probability distribution on the same support.
    pub fn nearest_probability(&self) -> QuasiDistribution {
        let w: Vec<f64> = self.weights.values().copied().collect();
        let p = project_to_simplex(&w);
        QuasiDistribution { n_qubits: self.n_qubits, weights: self.weights.keys().copied().zip(p).collect() }
    }

    /// Largest-weight bitstring; ties go to the lower index.
    pub fn most_likely(&self) -> Option<(Bitstring, f64)> {
        let (k, w) = self.iter().fold(None, |best: Option<(u64, f64)>, (k, w)| match best {
            Some((_, bw)) if bw >= w => best,
            _ => Some((k, w)),
        })?;
        Some((Bitstring::from_index(k, self.n_qubits).ok()?, w))
    }
}

/// Projection of `v` onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `0.5 * sum_k |p_k - q_k|` over the union of supports.
pub fn total_variation(p: impl IntoIterator<Item = (u64, f64)>, q: impl IntoIterator<Item = (u64, f64)>) -> f64 {
    let mut diff: BTreeMap<u64, f64> = p.into_iter().collect();
    for (k, w) in q {
        *diff.entry(k).or_insert(0.0) -= w;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

impl Serialize for QuasiDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.weights.len()))?;
        for (&k, &w) in &self.weights {
            map.serialize_entry(&index_to_string(k, self.n_qubits), &w)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for QuasiDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut n = None;
        let mut weights = BTreeMap::new();
        for (key, w) in raw {
            let b: Bitstring = key.parse().map_err(serde::de::Error::custom)?;
            if *n.get_or_insert(b.len()) != b.len() {
                return Err(serde::de::Error::custom("keys have different lengths"));
            }
            weights.insert(b.index(), w);
        }
        QuasiDistribution::new(n.unwrap_or(0), weights).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_is_identity_on_distributions() {
        let p = [0.2, 0.5, 0.3];
        let q = project_to_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_clips_negative_weights() {
        let q = project_to_simplex(&[1.1, -0.1]);
        assert_eq!(q, vec![1.0, 0.0]);
        let q = project_to_simplex(&[0.6, 0.6, -0.2]);
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.5).abs() < 1e-15 && q[2] == 0.0);
    }

    #[test]
    fn rejects_bad_sums_and_round_trips() {
        assert!(QuasiDistribution::new(2, BTreeMap::from([(0, 0.5)])).is_err());
        let q = QuasiDistribution::new(2, BTreeMap::from([(0, 1.2), (3, -0.2)])).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"00":1.2,"11":-0.2}"#);
        assert_eq!(serde_json::from_str::<QuasiDistribution>(&s).unwrap(), q);
        assert_eq!(q.most_likely().unwrap().0.to_string(), "00");
    }

    #[test]
    fn total_variation_over_union() {
        let tv = total_variation([(0, 0.5), (1, 0.5)], [(0, 0.5), (2, 0.5)]);
        assert!((tv - 0.5).abs() < 1e-15);
    }
}
