//! Dormand–Prince 5(4) with standard step-size control.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

/// Integrates y' = f(t, y) from 0 to `t_end` in place; returns accepted steps.
pub(crate) fn integrate<F>(mut f: F, y: &mut [f64], t_end: f64, tol: &Tolerance) -> Result<usize>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if t_end <= 0.0 {
        return Ok(0);
    }
    let n = y.len();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    let mut h = t_end / 50.0;
    let mut steps = 0;
    f(y, &mut k[0]);
    let mut attempts = 0;
    while t < t_end {
        attempts += 1;
        if attempts > tol.max_steps {
            return Err(Error::Integration(format!("no convergence after {} step attempts", tol.max_steps)));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h * a * kj[i];
                    }
                }
                tmp[i] = acc;
            }
            f(&tmp, &mut k[s]);
        }
        // tmp now holds the fifth-order solution (stage 7 is evaluated there)
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = tol.atol + tol.rtol * y[i].abs().max(tmp[i].abs());
            err = err.max((h * e).abs() / sc);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&tmp);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(steps)
}
