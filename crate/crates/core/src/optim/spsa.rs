use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Minimum;
use crate::error::{Error, Result};

/// Gain schedule `a_k = a / (k + 1 + A)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    /// Stability constant; `None` means a tenth of the iteration budget.
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains { a: 0.2, c: 0.1, big_a: None, alpha: 0.602, gamma: 0.101 }
    }
}

impl SpsaGains {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.a, self.c, self.alpha, self.gamma].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.big_a.is_none_or(|a| a >= 0.0);
        if !ok {
            return Err(Error::InvalidParameter(format!("SPSA gains must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Two-sided SPSA with Rademacher perturbations.
///
/// Each iteration spends two evaluations on the gradient estimate and one on
/// the new iterate; the iterate values form the trace and the best of them
/// is returned.
pub fn spsa<F, R>(mut f: F, x0: &[f64], max_iter: usize, gains: &SpsaGains, rng: &mut R) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    gains.validate()?;
    if x0.is_empty() {
        return Err(Error::InvalidParameter("cannot minimize over zero parameters".into()));
    }
    let big_a = gains.big_a.unwrap_or(max_iter as f64 / 10.0);
    let mut evals = 0usize;
    let check = |v: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        if !v.is_finite() {
            return Err(Error::Divergence(format!("objective returned {v} at evaluation {}", *evals)));
        }
        Ok(v)
    };

    let mut x = x0.to_vec();
    let f0 = check(f(&x), &mut evals)?;
    let mut best = (x.clone(), f0);
    let mut trace = Vec::with_capacity(max_iter);
    let mut delta = vec![0.0; x.len()];
    let mut plus = vec![0.0; x.len()];
    let mut minus = vec![0.0; x.len()];
    for k in 0..max_iter {
        let ak = gains.a / (k as f64 + 1.0 + big_a).powf(gains.alpha);
        let ck = gains.c / (k as f64 + 1.0).powf(gains.gamma);
        for d in delta.iter_mut() {
            *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        for i in 0..x.len() {
            plus[i] = x[i] + ck * delta[i];
            minus[i] = x[i] - ck * delta[i];
        }
        let fp = check(f(&plus), &mut evals)?;
        let fm = check(f(&minus), &mut evals)?;
        let slope = (fp - fm) / (2.0 * ck);
        for i in 0..x.len() {
            // 1 / delta_i == delta_i for +-1 entries
            x[i] -= ak * slope * delta[i];
        }
        let fx = check(f(&x), &mut evals)?;
        trace.push(fx);
        if fx < best.1 {
            best = (x.clone(), fx);
        }
    }
    Ok(Minimum { x: best.0, f: best.1, evals, iterations: max_iter, trace })
}

#[cfg(test)]
mod tests {
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::rng::seeded;

    #[test]
    fn converges_on_a_noisy_quadratic() {
        let mut noise_rng = seeded(1);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>() + noise.sample(&mut noise_rng);
        let m = spsa(f, &[0.0; 6], 2000, &SpsaGains::default(), &mut seeded(2)).unwrap();
        for v in &m.x {
            assert!((v - 0.5).abs() < 0.1, "{:?}", m.x);
        }
        assert_eq!(m.trace.len(), 2000);
        assert_eq!(m.evals, 1 + 3 * 2000);
    }

    #[test]
    fn deterministic_per_seed() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + x[1].powi(2);
        let a = spsa(f, &[0.0, 1.0], 100, &SpsaGains::default(), &mut seeded(5)).unwrap();
        let b = spsa(f, &[0.0, 1.0], 100, &SpsaGains::default(), &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_gains_and_divergence() {
        let gains = SpsaGains { a: -1.0, ..SpsaGains::default() };
        assert!(spsa(|x| x[0], &[0.0], 10, &gains, &mut seeded(0)).is_err());
        let err = spsa(|_| f64::INFINITY, &[0.0], 10, &SpsaGains::default(), &mut seeded(0)).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }
}
