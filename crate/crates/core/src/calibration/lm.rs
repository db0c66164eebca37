//! Levenberg–Marquardt for small dense problems.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// central-difference step relative to max(|p|, scale)
    pub fd_rel_step: f64,
    /// stop once the sum of squared residuals drops below this
    pub cost_floor: f64,
    /// stop once a step changes the parameters by less than this, relatively
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 200, fd_rel_step: 1e-6, cost_floor: 1e-28, step_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Σ r² at the solution
    pub cost: f64,
    /// (JᵀJ)⁻¹ of the residual Jacobian at the solution
    pub jtj_inv: DMatrix<f64>,
    pub iterations: usize,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F>(f: &F, p: &[f64], scales: &[f64], rel: f64, m: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut j = DMatrix::zeros(m, p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = rel * p[k].abs().max(scales[k]);
        q[k] = p[k] + h;
        let up = f(&q)?;
        q[k] = p[k] - h;
        let dn = f(&q)?;
        q[k] = p[k];
        for i in 0..m {
            j[(i, k)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Minimises Σ rᵢ(p)² starting from `p0`. `scales` gives the typical size of
/// each parameter, used for the difference step when a parameter is near 0.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], scales: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = residuals(&p)?;
    let m = r.len();
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = cost < opts.cost_floor;
    while !converged {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence(opts.max_iter));
        }
        iterations += 1;
        let j = jacobian(&residuals, &p, scales, opts.fd_rel_step, m)?;
        let jtj = j.tr_mul(&j);
        let g = j.tr_mul(&DVector::from_column_slice(&r));
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial)?;
            let ct = sum_sq(&rt);
            if ct.is_finite() && ct < cost {
                let pn = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                let small = step.norm() <= opts.step_tol * (pn + opts.step_tol);
                let stalled = cost - ct <= 1e-15 * cost;
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                converged = cost < opts.cost_floor || small || stalled;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill direction left at working precision
            converged = true;
        }
    }
    let j = jacobian(&residuals, &p, scales, opts.fd_rel_step, m)?;
    let jtj = j.tr_mul(&j);
    let jtj_inv = jtj.clone().try_inverse().unwrap_or_else(|| {
        jtj.pseudo_inverse(1e-300).unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN))
    });
    Ok(LmOutcome { params: p, cost, jtj_inv, iterations })
}
