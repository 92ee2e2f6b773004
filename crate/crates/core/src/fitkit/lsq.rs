//! Levenberg-Marquardt least squares with a finite-difference Jacobian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LsqOptions<T = f64> {
    /// Relative step size that counts as convergence.
    pub tol: T,
    /// Gradient infinity-norm that counts as convergence.
    pub grad_tol: T,
    pub max_iter: usize,
    pub lower: Option<Vec<T>>,
    pub upper: Option<Vec<T>>,
    /// Take the supplied sigmas at face value instead of rescaling the
    /// covariance by the reduced chi-square.
    pub absolute_sigma: bool,
}

impl<T: Scalar> Default for LsqOptions<T> {
    fn default() -> Self {
        LsqOptions {
            tol: T::lit(1e-9),
            grad_tol: T::lit(1e-12),
            max_iter: 500,
            lower: None,
            upper: None,
            absolute_sigma: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T = f64> {
    pub params: Vec<T>,
    pub stderr: Vec<T>,
    /// Euclidean norm of the weighted residuals.
    pub residual_norm: T,
    /// Sum of squared weighted residuals.
    pub rss: T,
    pub covariance: Vec<Vec<T>>,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes relative to the matrix scale.
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    let tiny = scale * T::epsilon() * T::lit(n as f64);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > tiny) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * *src;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn invert<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut inv = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = solve_dense(a.to_vec(), e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

struct Problem<'a, T, F> {
    model: F,
    x: &'a [T],
    y: &'a [T],
    weight: Vec<T>,
}

impl<T: Scalar, F: Fn(T, &[T]) -> T> Problem<'_, T, F> {
    fn residuals(&self, p: &[T]) -> Vec<T> {
        self.x
            .iter()
            .zip(self.y)
            .zip(&self.weight)
            .map(|((&x, &y), &w)| (y - (self.model)(x, p)) * w)
            .collect()
    }

    /// Central differences of the residuals, one column per parameter.
    fn jacobian(&self, p: &[T]) -> Vec<Vec<T>> {
        let h0 = T::epsilon().cbrt();
        let mut jac = vec![vec![T::zero(); p.len()]; self.x.len()];
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = h0 * p[j].abs().max(T::one());
            q[j] = p[j] + h;
            let up = self.residuals(&q);
            q[j] = p[j] - h;
            let dn = self.residuals(&q);
            q[j] = p[j];
            for i in 0..self.x.len() {
                jac[i][j] = (up[i] - dn[i]) / (h + h);
            }
        }
        jac
    }
}

fn rss<T: Scalar>(r: &[T]) -> T {
    r.iter().map(|v| *v * *v).sum()
}

fn project<T: Scalar>(p: &mut [T], opts: &LsqOptions<T>) {
    if let Some(lo) = &opts.lower {
        p.iter_mut().zip(lo).for_each(|(v, l)| *v = v.max(*l));
    }
    if let Some(hi) = &opts.upper {
        p.iter_mut().zip(hi).for_each(|(v, h)| *v = v.min(*h));
    }
}

/// Fits `model(x, params)` to `(x, y)` by minimizing the sum of squared
/// residuals, weighted by `1 / sigma` when given.
///
/// Each iteration first tries the undamped Gauss-Newton step and falls back to
/// Marquardt damping `J^T J + lambda diag(J^T J)` while the step fails to
/// reduce the residual. Steps are projected onto the box bounds.
pub fn lsq_fit<T, F>(
    model: F,
    x: &[T],
    y: &[T],
    sigma: Option<&[T]>,
    init: &[T],
    opts: &LsqOptions<T>,
) -> Result<FitResult<T>>
where
    T: Scalar,
    F: Fn(T, &[T]) -> T,
{
    let (n, np) = (x.len(), init.len());
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::Table(format!("length mismatch: {n} abscissae, {} values", y.len())));
    }
    if n < np || np == 0 {
        return Err(Error::Underdetermined(format!("{n} samples for {np} parameters")));
    }
    if x.iter().chain(y).chain(init).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite input".into()));
    }
    let weight = match sigma {
        Some(s) => {
            if s.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::Degenerate("sigma must be positive".into()));
            }
            s.iter().map(|v| T::one() / *v).collect()
        }
        None => vec![T::one(); n],
    };
    let prob = Problem { model, x, y, weight };

    let mut p = init.to_vec();
    project(&mut p, opts);
    let mut r = prob.residuals(&p);
    let mut cost = rss(&r);
    let mut lambda = T::zero();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let jac = prob.jacobian(&p);
        let mut jtj = vec![vec![T::zero(); np]; np];
        let mut grad = vec![T::zero(); np];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..np {
                grad[a] += row[a] * *ri;
                for b in 0..np {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        // grad is -J^T r for the residual convention y - f
        let gnorm = grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if gnorm < opts.grad_tol {
            converged = true;
            break;
        }
        if (0..np).any(|a| jtj[a][a] == T::zero()) {
            return Err(Error::SingularJacobian);
        }

        let mut accepted = false;
        loop {
            let mut a = jtj.clone();
            for (k, row) in a.iter_mut().enumerate() {
                row[k] += lambda * jtj[k][k];
            }
            let step = solve_dense(a, grad.clone());
            if let Some(step) = step {
                let mut trial: Vec<T> = p.iter().zip(&step).map(|(a, b)| *a - *b).collect();
                project(&mut trial, opts);
                let tr = prob.residuals(&trial);
                let tc = rss(&tr);
                if tc.is_finite() && tc <= cost {
                    let dx = trial.iter().zip(&p).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
                    let xn = p.iter().map(|v| *v * *v).sum::<T>().sqrt();
                    p = trial;
                    r = tr;
                    cost = tc;
                    lambda = if lambda < T::lit(1e-7) { T::zero() } else { lambda / T::lit(10.0) };
                    accepted = true;
                    if dx <= opts.tol * (xn + opts.tol) {
                        converged = true;
                    }
                    break;
                }
            }
            lambda = if lambda == T::zero() { T::lit(1e-3) } else { lambda * T::lit(10.0) };
            if lambda > T::lit(1e16) {
                break;
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // no descent step exists at working precision
            log::debug!("lsq_fit: damping exhausted after {iterations} iterations");
            converged = gnorm <= T::epsilon().sqrt() * (cost + T::epsilon()).sqrt() * T::lit(n as f64).sqrt();
            break;
        }
    }
    if !converged {
        log::warn!("lsq_fit: not converged after {iterations} iterations; returning best parameters");
    }

    let jac = prob.jacobian(&p);
    let mut jtj = vec![vec![T::zero(); np]; np];
    for row in &jac {
        for a in 0..np {
            for b in 0..np {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    let mut cov = invert(&jtj).ok_or(Error::SingularJacobian)?;
    if !opts.absolute_sigma && n > np {
        let s2 = cost / T::lit((n - np) as f64);
        cov.iter_mut().flatten().for_each(|c| *c *= s2);
    }
    let stderr = (0..np).map(|k| cov[k][k].max(T::zero()).sqrt()).collect();
    Ok(FitResult { params: p, stderr, residual_norm: cost.sqrt(), rss: cost, covariance: cov, converged, iterations })
}
