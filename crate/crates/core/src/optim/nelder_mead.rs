use serde::{Deserialize, Serialize};

use super::Minimum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop when every vertex is within `x_tol` of the best (infinity norm)...
    pub x_tol: f64,
    /// ...and the objective spread across the simplex is below `f_tol`.
    pub f_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iter: 5000, x_tol: 1e-6, f_tol: 1e-9, initial_step: 0.5 }
    }
}

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han), which keep
/// the simplex from collapsing in a few dozen dimensions.
///
/// The trace holds the best vertex value after each iteration and is
/// therefore non-increasing.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot minimize over zero parameters".into()));
    }
    if !(opts.x_tol > 0.0 && opts.f_tol > 0.0 && opts.initial_step > 0.0) {
        return Err(Error::InvalidParameter("simplex tolerances and step must be positive".into()));
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            return Err(Error::Divergence(format!("objective returned NaN at evaluation {}", *evals)));
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let fx = eval(&x, &mut evals)?;
        simplex.push((x, fx));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut centroid = vec![0.0; n];
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(c, w)| c + t * (w - c)).collect() };

    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread_x = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_x <= opts.x_tol && (worst - best).abs() <= opts.f_tol {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let worst_x = simplex[n].0.clone();
        let xr = point(&centroid, &worst_x, -alpha);
        let fr = eval(&xr, &mut evals)?;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst_x, -gamma);
            let fe = eval(&xe, &mut evals)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = point(&centroid, &xr, rho);
                let fc = eval(&xc, &mut evals)?;
                (xc, fc)
            } else {
                let xc = point(&centroid, &worst_x, rho);
                let fc = eval(&xc, &mut evals)?;
                (xc, fc)
            };
            if fc < fr.min(worst) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let xs = point(&x_best, &vertex.0, sigma);
                    let fs = eval(&xs, &mut evals)?;
                    *vertex = (xs, fs);
                }
            }
        }
        trace.push(simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min));
    }

    let (x, fx) = simplex.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty simplex");
    Ok(Minimum { x, f: fx, evals, iterations, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
    }

    #[test]
    fn minimizes_rosenbrock() {
        let opts = SimplexOptions { max_iter: 20_000, x_tol: 1e-10, f_tol: 1e-14, initial_step: 0.5 };
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(m.trace.len(), m.iterations);
    }

    #[test]
    fn minimizes_a_quadratic_in_many_dimensions() {
        let target: Vec<f64> = (0..24).map(|i| (i as f64 * 0.37).sin()).collect();
        let f = |x: &[f64]| {
            x.iter().zip(&target).enumerate().map(|(i, (a, b))| (1.0 + i as f64 / 10.0) * (a - b).powi(2)).sum::<f64>()
        };
        let opts = SimplexOptions { max_iter: 50_000, ..SimplexOptions::default() };
        let m = nelder_mead(f, &[0.0; 24], &opts).unwrap();
        assert!(m.f < 1e-8, "f = {}", m.f);
    }

    #[test]
    fn nan_objective_is_divergence() {
        let err = nelder_mead(|_| f64::NAN, &[0.0], &SimplexOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn rejects_bad_options() {
        let opts = SimplexOptions { x_tol: 0.0, ..SimplexOptions::default() };
        assert!(nelder_mead(|x| x[0], &[0.0], &opts).is_err());
        assert!(nelder_mead(|_| 0.0, &[], &SimplexOptions::default()).is_err());
    }
}
