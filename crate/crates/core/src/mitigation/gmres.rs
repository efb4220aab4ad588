use crate::error::{Error, Result};

const RESTART: usize = 50;

/// Restarted GMRES with right Jacobi preconditioning, so the monitored
/// residual is the true residual `||b - A x||`. Stops at `||r|| <= tol` or
/// after `max_iter` inner iterations.
pub(super) fn solve<F>(matvec: F, b: &[f64], diag: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(diag).map(|(x, d)| x / d).collect() };

    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut iterations = 0;
    loop {
        matvec(&x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= tol {
            return Ok(x);
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged { iterations, residual: beta });
        }
        let m = RESTART.min(n).min(max_iter - iterations).max(1);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, already rotated into upper-triangular form
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            iterations += 1;
            let z = precond(&basis[k]);
            let mut w = vec![0.0; n];
            matvec(&z, &mut w);
            let mut h = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wj, vj)| *wj -= h[i] * vj);
            }
            h[k + 1] = norm(&w);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, b) = (h[i], h[i + 1]);
                h[i] = c * a + s * b;
                h[i + 1] = -s * a + c * b;
            }
            let d = h[k].hypot(h[k + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[k] / d, h[k + 1] / d) };
            h[k] = d;
            let sub = h[k + 1];
            h.truncate(k + 1);
            rot.push((c, s));
            g[k + 1] = -s * g[k];
            g[k] *= c;
            hcols.push(h);
            k += 1;
            if g[k].abs() <= tol || sub <= f64::EPSILON * beta {
                break;
            }
            basis.push(w.iter().map(|v| v / sub).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hcols[j][i] * y[j]).sum();
            y[i] = (g[i] - s) / hcols[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vj)| *u += yi * vj);
        }
        for (xi, zi) in x.iter_mut().zip(precond(&update)) {
            *xi += zi;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("GMRES iterate".into()));
        }
    }
}
