//! The kernel triple (h, p, q) that fixes every spin moment at a given detuning.
//!
//! h = ∫ g(s) e^{−iδs} ds, p = −∫ g(s) Im[e^{iδs} h(s)] ds and
//! q = ∫ g(s) F(s) ds with F(s) = ∫_0^s η(u) cos δ(s−u) du, kicks counting as
//! η(u) = β δ(u − t). Specialised protocols use closed forms written in terms
//! of sinc and (x − sin x)/x² so nothing cancels near δ = 0; p and q also have
//! an explicit Taylor branch below |δ·T| = 1e-4.

use crate::error::{invalid, Result};
use crate::numerics::{adaptive_simpson, sinc, x_minus_sin_over_sq as xms};
use crate::types::{Protocol, ProtocolSpec, PulseSchedule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Below this |δ · duration| the Taylor polynomials are used for p and q.
pub const SERIES_THRESHOLD: f64 = 1e-4;

const QUAD_REL: f64 = 1e-10;
const QUAD_ABS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernels {
    pub h: Complex64,
    pub p: f64,
    pub q: f64,
    pub odf_on_time: f64,
}

impl Kernels {
    pub fn h_abs_sq(&self) -> f64 {
        self.h.norm_sqr()
    }
}

/// ∫_a^b e^{−iδs} ds
fn phase_integral(a: f64, b: f64, delta: f64) -> Complex64 {
    let len = b - a;
    Complex64::from_polar(len * sinc(0.5 * delta * len), -0.5 * delta * (a + b))
}

/// ∫_a^c cos δ(s − u) du for c ≤ s
fn cos_window(s: f64, a: f64, c: f64, delta: f64) -> f64 {
    (s - a) * sinc(delta * (s - a)) - (s - c) * sinc(delta * (s - c))
}

/// Kernels of an arbitrary piecewise-constant schedule.
pub fn kernels_generic(schedule: &PulseSchedule, delta: f64) -> Result<Kernels> {
    schedule.validate()?;
    if !delta.is_finite() {
        return invalid("detuning must be finite");
    }
    let segs = &schedule.segments;
    let mut starts = Vec::with_capacity(segs.len());
    let mut t = 0.0;
    for s in segs {
        starts.push(t);
        t += s.duration;
    }
    let mut kicks = schedule.kicks.clone();
    kicks.sort_by(|a, b| a.time.total_cmp(&b.time));

    // h at the start of each segment
    let mut h_start = Vec::with_capacity(segs.len());
    let mut h = Complex64::new(0.0, 0.0);
    for (s, &a) in segs.iter().zip(&starts) {
        h_start.push(h);
        if s.g != 0.0 {
            h += s.g * phase_integral(a, a + s.duration, delta);
        }
    }

    let mut p = 0.0;
    let mut q = 0.0;
    for (k, s) in segs.iter().enumerate() {
        if s.g == 0.0 || s.duration == 0.0 {
            continue;
        }
        let (a, b, g) = (starts[k], starts[k] + s.duration, s.g);
        let h0 = h_start[k];
        let hs = |x: f64| h0 + g * phase_integral(a, x, delta);
        p += adaptive_simpson(
            |x| -g * (Complex64::from_polar(1.0, delta * x) * hs(x)).im,
            a,
            b,
            QUAD_REL,
            QUAD_ABS,
        )?;

        // split at kicks strictly inside the segment
        let mut cuts = vec![a];
        cuts.extend(kicks.iter().map(|k| k.time).filter(|&t| t > a && t < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let active: Vec<_> = kicks.iter().filter(|k| k.time <= lo).collect();
            let field = |x: f64| {
                let mut f: f64 = active.iter().map(|k| k.beta * (delta * (x - k.time)).cos()).sum();
                for (l, sl) in segs.iter().enumerate() {
                    if sl.eta == 0.0 || starts[l] >= x {
                        continue;
                    }
                    let c = (starts[l] + sl.duration).min(x);
                    f += sl.eta * cos_window(x, starts[l], c, delta);
                }
                g * f
            };
            q += adaptive_simpson(field, lo, hi, QUAD_REL, QUAD_ABS)?;
        }
    }
    Ok(Kernels { h, p, q, odf_on_time: schedule.odf_on_time() })
}

/// +g for τ, kick β, −g for τ.
pub fn kernels_displacement(g: f64, tau: f64, delta: f64, beta: f64) -> Result<Kernels> {
    if !(tau > 0.0) {
        return invalid(format!("tau must be positive, got {tau}"));
    }
    let x = delta * tau;
    let h = Complex64::from_polar(2.0 * g * tau * sinc(0.5 * x) * (0.5 * x).sin(), -x)
        * Complex64::new(0.0, 1.0);
    let (p, q) = if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        let gg = g * g * tau * tau;
        (
            gg * x * (2.0 / 3.0 - x2 * (7.0 / 30.0 - x2 * (31.0 / 1260.0 - x2 * 127.0 / 90720.0))),
            -beta * g * tau * (1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0),
        )
    } else {
        (
            4.0 * g * g * tau * tau * (xms(2.0 * x) - xms(x)),
            -beta * g * tau * sinc(x),
        )
    };
    Ok(Kernels { h, p, q, odf_on_time: 2.0 * tau })
}

/// Constant η over T with −g during the last τ.
pub fn kernels_classical_efield(g: f64, tau: f64, t_total: f64, delta: f64, eta: f64) -> Result<Kernels> {
    if !(tau > 0.0) {
        return invalid(format!("tau must be positive, got {tau}"));
    }
    if tau > t_total {
        return invalid(format!("classical protocol needs tau <= T ({tau} > {t_total})"));
    }
    let x = delta * tau;
    let h = -g * tau * sinc(0.5 * x) * Complex64::from_polar(1.0, -delta * (t_total - 0.5 * tau));
    let (p, q) = if (delta * t_total).abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        let a = 0.5 * delta * (2.0 * t_total - tau);
        let a2 = a * a;
        (
            -g * g * tau * tau * x * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0),
            -eta * g * tau * (2.0 * t_total - tau) / 2.0
                * (1.0 - a2 / 6.0 + a2 * a2 / 120.0)
                * (1.0 - x2 / 24.0 + x2 * x2 / 1920.0),
        )
    } else {
        (
            -g * g * tau * tau * xms(x),
            -eta * g * tau * (2.0 * t_total - tau) / 2.0
                * sinc(0.5 * delta * (2.0 * t_total - tau))
                * sinc(0.5 * x),
        )
    };
    Ok(Kernels { h, p, q, odf_on_time: tau })
}

/// Constant η over T with +g during the first τ and −g during the last τ.
pub fn kernels_quantum_efield(g: f64, tau: f64, t_total: f64, delta: f64, eta: f64) -> Result<Kernels> {
    if !(tau > 0.0) {
        return invalid(format!("tau must be positive, got {tau}"));
    }
    if 2.0 * tau > t_total {
        return invalid(format!("quantum protocol needs 2 tau <= T ({tau}, {t_total})"));
    }
    let x = delta * tau;
    let y = delta * (t_total - tau);
    let h = g * tau * sinc(0.5 * x)
        * (Complex64::from_polar(1.0, -0.5 * x) - Complex64::from_polar(1.0, -delta * (t_total - 0.5 * tau)));
    let (p, q) = if (delta * t_total).abs() < SERIES_THRESHOLD {
        let (tt, ta) = (t_total, tau);
        let d = delta;
        let gg = g * g * ta * ta;
        let p1 = gg * (3.0 * tt - 4.0 * ta) / 3.0;
        let p3 = -gg
            * (10.0 * tt.powi(3) - 30.0 * tt * tt * ta + 35.0 * tt * ta * ta - 16.0 * ta.powi(3))
            / 60.0;
        let p5 = gg
            * (21.0 * tt.powi(5) - 105.0 * tt.powi(4) * ta + 245.0 * tt.powi(3) * ta * ta
                - 315.0 * tt * tt * ta.powi(3)
                + 217.0 * tt * ta.powi(4)
                - 64.0 * ta.powi(5))
            / 2520.0;
        let base = -eta * g * ta * (tt - ta);
        let q2 = (2.0 * tt * tt - tt * ta + ta * ta) / 12.0;
        let q4 = (6.0 * tt.powi(4) - 9.0 * tt.powi(3) * ta + 11.0 * tt * tt * ta * ta
            - 4.0 * tt * ta.powi(3)
            + 2.0 * ta.powi(4))
            / 720.0;
        let d2 = d * d;
        (d * (p1 + d2 * (p3 + d2 * p5)), base * (1.0 - d2 * q2 + d2 * d2 * q4))
    } else {
        let s = sinc(0.5 * x);
        (
            -2.0 * g * g * tau * tau * (xms(x) - 0.5 * s * s * y.sin()),
            -g * eta * tau * (t_total - tau) * s * sinc(0.5 * y) * (0.5 * delta * t_total).cos(),
        )
    };
    Ok(Kernels { h, p, q, odf_on_time: 2.0 * tau })
}

/// Kick β at t = 0, then −g for τ.
pub fn kernels_readout(g: f64, tau: f64, delta: f64, beta: f64) -> Result<Kernels> {
    if !(tau > 0.0) {
        return invalid(format!("tau must be positive, got {tau}"));
    }
    let spec = ProtocolSpec { variant: Protocol::ReadoutOnly { g, tau, beta }, ion_count: 1 };
    kernels_generic(&spec.schedule(), delta)
}

/// Dispatches to the closed form matching the protocol.
pub fn kernels_for(spec: &ProtocolSpec, delta: f64) -> Result<Kernels> {
    match &spec.variant {
        Protocol::Displacement { g, tau, beta } => kernels_displacement(*g, *tau, delta, *beta),
        Protocol::ReadoutOnly { g, tau, beta } => kernels_readout(*g, *tau, delta, *beta),
        Protocol::ClassicalEField { g, tau, t_total, eta } => {
            kernels_classical_efield(*g, *tau, *t_total, delta, *eta)
        }
        Protocol::QuantumEField { g, tau, t_total, eta } => {
            kernels_quantum_efield(*g, *tau, *t_total, delta, *eta)
        }
        Protocol::Custom(s) => kernels_generic(s, delta),
    }
}
