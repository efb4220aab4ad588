use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Bitstring;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    #[default]
    Minimize,
    Maximize,
}

/// Quadratic binary model `w0 + sum_i Q_ii q_i + sum_{i<j} Q_ij q_i q_j`.
///
/// Pairwise coefficients are kept in a dense upper triangle; entries with
/// `i >= j` are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    n: usize,
    w0: f64,
    linear: Vec<f64>,
    quad: Vec<f64>,
    sense: Sense,
}

impl QuboModel {
    pub fn zeros(n: usize, sense: Sense) -> Self {
        QuboModel { n, w0: 0.0, linear: vec![0.0; n], quad: vec![0.0; n * n], sense }
    }

    /// Builds a model from pair triples. Pairs may be given in either index
    /// order; repeated pairs are summed.
    pub fn new(
        w0: f64,
        linear: Vec<f64>,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        sense: Sense,
    ) -> Result<Self> {
        let n = linear.len();
        let mut m = QuboModel { n, w0, linear, quad: vec![0.0; n * n], sense };
        for (i, j, v) in pairs {
            m.add_pair(i, j, v)?;
        }
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        let finite =
            self.w0.is_finite() && self.linear.iter().all(|v| v.is_finite()) && self.quad.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("QUBO coefficient".into()));
        }
        Ok(())
    }

    pub fn add_pair(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidParameter(format!("pair ({i}, {j}) is diagonal; use the linear term")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidParameter(format!("pair ({i}, {j}) out of range for n = {}", self.n)));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quad[a * self.n + b] += v;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn set_w0(&mut self, w0: f64) {
        self.w0 = w0;
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn linear_mut(&mut self) -> &mut [f64] {
        &mut self.linear
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Pairwise coefficient for `i != j` in either order.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b {
            return 0.0;
        }
        self.quad[a * self.n + b]
    }

    /// All `i < j` pairs with a non-zero coefficient, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.quad[i * n + j]))).filter(|&(_, _, v)| v != 0.0)
    }

    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        x.ensure_len(self.n)?;
        let mut e = self.w0;
        for i in 0..self.n {
            if x.bit(i) == 1 {
                e += self.linear[i];
                let row = &self.quad[i * self.n..(i + 1) * self.n];
                for (j, q) in row.iter().enumerate().skip(i + 1) {
                    if x.bit(j) == 1 {
                        e += q;
                    }
                }
            }
        }
        Ok(e)
    }

    /// Same model with every coefficient negated and the sense flipped.
    pub fn negated(&self) -> QuboModel {
        QuboModel {
            n: self.n,
            w0: -self.w0,
            linear: self.linear.iter().map(|v| -v).collect(),
            quad: self.quad.iter().map(|v| -v).collect(),
            sense: match self.sense {
                Sense::Minimize => Sense::Maximize,
                Sense::Maximize => Sense::Minimize,
            },
        }
    }
}

/// `w0 + sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j`.
pub fn qubo_energy(m: &QuboModel, x: &Bitstring) -> Result<f64> {
    m.energy(x)
}

#[derive(Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    w0: f64,
    linear: Vec<f64>,
    quadratic: Vec<(usize, usize, f64)>,
    #[serde(default)]
    sense: Sense,
}

impl Serialize for QuboModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QuboFile {
            n: self.n,
            w0: self.w0,
            linear: self.linear.clone(),
            quadratic: self.pairs().collect(),
            sense: self.sense,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuboModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = QuboFile::deserialize(deserializer)?;
        if file.linear.len() != file.n {
            return Err(serde::de::Error::custom(format!(
                "linear has {} entries but n = {}",
                file.linear.len(),
                file.n
            )));
        }
        QuboModel::new(file.w0, file.linear, file.quadratic, file.sense).map_err(serde::de::Error::custom)
    }
}
