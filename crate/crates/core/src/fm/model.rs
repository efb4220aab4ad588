use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Bitstring, QuboModel, Sense};

/// Default factor dimension.
pub const DEFAULT_KAPPA: usize = 8;

/// Second-order factorization machine over binary inputs:
/// `y = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmModel {
    pub n: usize,
    pub kappa: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    /// `v[i]` is the factor vector of variable `i`, length `kappa`.
    pub v: Vec<Vec<f64>>,
}

impl FmModel {
    pub fn zeros(n: usize, kappa: usize) -> Self {
        FmModel { n, kappa, w0: 0.0, w: vec![0.0; n], v: vec![vec![0.0; kappa]; n] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: self.w.len() });
        }
        if self.v.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: self.v.len() });
        }
        if let Some(bad) = self.v.iter().find(|row| row.len() != self.kappa) {
            return Err(Error::LengthMismatch { expected: self.kappa, got: bad.len() });
        }
        let finite = self.w0.is_finite()
            && self.w.iter().all(|x| x.is_finite())
            && self.v.iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite("factorization machine parameter".into()));
        }
        Ok(())
    }

    /// `<v_i, v_j>`.
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        self.v[i].iter().zip(&self.v[j]).map(|(a, b)| a * b).sum()
    }

    /// Prediction via the `O(kappa n)` factored form. Also returns the
    /// per-factor sums `s_f = sum_i v_if x_i` used by the gradient.
    pub(crate) fn predict_with_sums(&self, x: &Bitstring, sums: &mut [f64]) -> f64 {
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut y = self.w0;
        let mut sq = 0.0;
        for i in (0..self.n).filter(|&i| x.bit(i) == 1) {
            y += self.w[i];
            for (s, &vif) in sums.iter_mut().zip(&self.v[i]) {
                *s += vif;
                sq += vif * vif;
            }
        }
        y + 0.5 * (sums.iter().map(|s| s * s).sum::<f64>() - sq)
    }

    pub fn predict(&self, x: &Bitstring) -> Result<f64> {
        x.ensure_len(self.n)?;
        let mut sums = vec![0.0; self.kappa];
        Ok(self.predict_with_sums(x, &mut sums))
    }
}

pub fn fm_predict(m: &FmModel, x: &Bitstring) -> Result<f64> {
    m.predict(x)
}

/// `Q_ii = w_i`, `Q_ij = <v_i, v_j>`, constant `w0`. The exported model
/// minimizes unless told otherwise by the caller.
pub fn fm_to_qubo(m: &FmModel) -> QuboModel {
    fm_to_qubo_with_sense(m, Sense::Minimize)
}

pub fn fm_to_qubo_with_sense(m: &FmModel, sense: Sense) -> QuboModel {
    let mut q = QuboModel::zeros(m.n, sense);
    q.set_w0(m.w0);
    q.linear_mut().copy_from_slice(&m.w);
    for i in 0..m.n {
        for j in i + 1..m.n {
            let v = m.interaction(i, j);
            if v != 0.0 {
                q.add_pair(i, j, v).expect("indices in range");
            }
        }
    }
    q
}
