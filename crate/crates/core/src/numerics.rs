//! Small numerical helpers shared by the kernels, the averaging and the fits.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// sin(x)/x, with the Taylor series near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (x - sin x)/x², which is ~x/6 near zero.
pub fn x_minus_sin_over_sq(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // alternating series; the omitted term is below x^11/6e9
        x * (1.0 / 6.0
            - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 * (1.0 / 362_880.0 - x2 / 39_916_800.0))))
    } else {
        (x - x.sin()) / (x * x)
    }
}

/// n·ln cos x, accurate for small x; refuses |x| >= pi/2.
pub fn ln_cos_pow(x: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if !(x.abs() < FRAC_PI_2) {
        return Err(Error::OutsideDomain { arg: x });
    }
    let s = (0.5 * x).sin();
    Ok(n as f64 * (-2.0 * s * s).ln_1p())
}

/// cos(x)^n evaluated as exp(n ln cos x); refuses |x| >= pi/2.
pub fn cos_pow(x: f64, n: u32) -> Result<f64> {
    ln_cos_pow(x, n).map(f64::exp)
}

/// Adaptive Simpson quadrature.
///
/// Stops when the Richardson estimate of the local error is below
/// `max(rel * |I|, abs)`, where `I` is a coarse estimate of the integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64, abs: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // a coarse scale for the relative target; |f| integrals avoid a zero target
    // when the signed integral cancels
    let n = 16;
    let h = (b - a) / n as f64;
    let scale: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(a + i as f64 * h).abs()
        })
        .sum::<f64>()
        * h.abs();
    let tol = (rel * scale).max(abs);
    let mut evals = 0usize;
    let r = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 60, &mut evals);
    if !r.is_finite() {
        return Err(Error::Integration("non-finite integrand".into()));
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals)
}

/// Golden-section minimisation on [a, b] to absolute tolerance `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
