//! Least-squares calibration fits: detuning spread, depolarization,
//! drive ring-down and heating rate.

mod dataset;
mod lm;

pub use dataset::{CalibrationDataset, DataPoint};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};

use crate::error::{invalid, Error, Result};
use crate::kernels::kernels_displacement;
use crate::numerics::adaptive_simpson;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub covariance: Vec<Vec<f64>>,
    /// √Σ rᵢ², residuals weighted by 1/yerr when errors are given
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Fixed inputs of the σ fit. `g` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaFitFixed {
    pub g: f64,
    pub nbar: f64,
    pub n_ions: u32,
    pub gamma_tot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingDownFixed {
    pub gamma_tot: f64,
    /// echo arm length of the probe sequence
    pub tau: f64,
}

/// ⟨P↑⟩ after a 2τ echo with no drive, closed form.
///
/// The last term in the root is g⁴σ²τ⁶: τ² would not be dimensionless.
pub fn pup_model(tau: f64, g: f64, sigma: f64, nbar: f64, n_ions: u32, gamma_tot: f64) -> f64 {
    let n = n_ions as f64;
    let t2 = tau * tau;
    let gs = g * sigma;
    let root = (1.0 + gs * gs * t2 * t2 * (2.0 * nbar + 1.0) / n + 4.0 * g * g * gs * gs * t2 * t2 * t2 / (9.0 * n)).sqrt();
    0.5 - 0.5 * (-2.0 * gamma_tot * tau).exp() / root
}

/// Same quantity with ⟨J_x⟩/(N/2) averaged over the Gaussian detuning numerically.
pub fn pup_model_exact(tau: f64, g: f64, sigma: f64, nbar: f64, n_ions: u32, gamma_tot: f64) -> Result<f64> {
    if tau < 0.0 || sigma < 0.0 || nbar < 0.0 || n_ions == 0 {
        return invalid("pup_model_exact needs tau, sigma, nbar >= 0 and N >= 1");
    }
    let n = n_ions as f64;
    let coherence = |delta: f64| -> f64 {
        let k = kernels_displacement(g, tau, delta, 0.0).expect("validated arguments");
        (-k.h_abs_sq() * (nbar + 0.5) / n).exp() * (k.p / n).cos().powi(n_ions as i32 - 1)
    };
    let avg = if sigma == 0.0 {
        coherence(0.0)
    } else {
        // the integrand is even in δ
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let f = |d: f64| norm * (-0.5 * (d / sigma).powi(2)).exp() * coherence(d);
        2.0 * adaptive_simpson(f, 0.0, 10.0 * sigma, 1e-10, 1e-14)?
    };
    Ok(0.5 - 0.5 * (-2.0 * gamma_tot * tau).exp() * avg)
}

/// ⟨P↑⟩ ≈ ½[1 − e^{−2Γτ} cos θ_max], valid for small angles.
pub fn ring_down_model(theta_max: f64, gamma_tot: f64, tau: f64) -> f64 {
    0.5 * (1.0 - (-2.0 * gamma_tot * tau).exp() * theta_max.cos())
}

/// Γ_el from Γ_tot = (Γ_ram + Γ_el)/2 with Γ_el ≈ 4Γ_ram.
pub fn gamma_el_from_total(gamma_tot: f64) -> f64 {
    8.0 * gamma_tot / 5.0
}

pub fn per_ion_heating_rate(rate: f64, n_ions: u32) -> Result<f64> {
    if n_ions == 0 {
        return invalid("N must be positive");
    }
    Ok(rate / n_ions as f64)
}

fn weights(data: &CalibrationDataset) -> Vec<f64> {
    data.points.iter().map(|p| p.yerr.map_or(1.0, |e| 1.0 / e)).collect()
}

fn fit<M>(data: &CalibrationDataset, names: &[&str], p0: &[f64], scales: &[f64], model: M) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let w = weights(data);
    let resid = |p: &[f64]| -> Result<Vec<f64>> {
        let r: Vec<f64> = data.points.iter().zip(&w).map(|(pt, w)| (model(pt.x, p) - pt.y) * w).collect();
        if r.iter().all(|x| x.is_finite()) {
            Ok(r)
        } else {
            Ok(vec![f64::INFINITY; r.len()])
        }
    };
    let out = levenberg_marquardt(resid, p0, scales, &LmOptions::default())?;
    let m = data.points.len();
    let k = p0.len();
    // without given errors the residual scatter sets the scale
    let s2 = if data.has_errors() {
        1.0
    } else if m > k {
        out.cost / (m - k) as f64
    } else {
        0.0
    };
    let cov: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| 0.5 * (out.jtj_inv[(i, j)] + out.jtj_inv[(j, i)]) * s2).collect())
        .collect();
    let params = names
        .iter()
        .enumerate()
        .map(|(i, n)| FitParam { name: n.to_string(), value: out.params[i], std_error: cov[i][i].max(0.0).sqrt() })
        .collect();
    Ok(FitResult { params, covariance: cov, residual_norm: out.cost.sqrt(), iterations: out.iterations })
}

/// Coarse scan of a 1-parameter model over [lo, hi] for a starting value.
fn grid_start<M: Fn(f64, f64) -> f64>(data: &CalibrationDataset, lo: f64, hi: f64, model: M) -> f64 {
    let w = weights(data);
    let mut best = (lo, f64::INFINITY);
    for i in 0..=100 {
        let v = lo + (hi - lo) * i as f64 / 100.0;
        let c: f64 = data.points.iter().zip(&w).map(|(p, w)| ((model(p.x, v) - p.y) * w).powi(2)).sum();
        if c < best.1 {
            best = (v, c);
        }
    }
    best.0
}

/// Fits σ (rad/s) to ⟨P↑⟩ against τ. The model is even in σ; the magnitude is reported.
pub fn fit_sigma(data: &CalibrationDataset, fixed: &SigmaFitFixed) -> Result<FitResult> {
    if !(fixed.g > 0.0) || fixed.nbar < 0.0 || fixed.n_ions == 0 || fixed.gamma_tot < 0.0 {
        return invalid("fit_sigma needs g > 0, nbar >= 0, N >= 1, gamma_tot >= 0");
    }
    if data.points.iter().any(|p| p.x < 0.0) {
        return Err(Error::Data("tau values must be non-negative".into()));
    }
    let SigmaFitFixed { g, nbar, n_ions, gamma_tot } = *fixed;
    let model = move |tau: f64, s: f64| pup_model(tau, g, s, nbar, n_ions, gamma_tot);
    let two_pi = 2.0 * std::f64::consts::PI;
    let s0 = grid_start(data, 0.0, two_pi * 500.0, model).max(two_pi);
    let mut r = fit(data, &["sigma"], &[s0], &[two_pi], |x, p| model(x, p[0]))?;
    r.params[0].value = r.params[0].value.abs();
    Ok(r)
}

/// Fits Γ_tot to contrast data y = exp(−Γ_tot x), x = 2τ the total ODF time.
pub fn fit_contrast(data: &CalibrationDataset) -> Result<FitResult> {
    // log-linear start through the origin
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in data.points.iter().filter(|p| p.y > 0.0) {
        sxy += p.x * p.y.ln();
        sxx += p.x * p.x;
    }
    let g0 = if sxx > 0.0 { (-sxy / sxx).max(0.0) } else { 0.0 };
    let xmax = data.points.iter().fold(0.0f64, |m, p| m.max(p.x.abs()));
    let scale = if xmax > 0.0 { 1.0 / xmax } else { 1.0 };
    fit(data, &["gamma_tot"], &[g0], &[scale], |x, p| (-p[0] * x).exp())
}

/// Fits θ_max(t) = θ₀ e^{−κt} through the ring-down model against wait time t.
pub fn fit_ring_down(data: &CalibrationDataset, fixed: &RingDownFixed) -> Result<FitResult> {
    if fixed.gamma_tot < 0.0 || fixed.tau < 0.0 {
        return invalid("fit_ring_down needs gamma_tot, tau >= 0");
    }
    let c = (-2.0 * fixed.gamma_tot * fixed.tau).exp();
    let theta_of = |y: f64| ((1.0 - 2.0 * y) / c).clamp(-1.0, 1.0).acos();
    let mut pts = data.points.clone();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let (th_a, th_b) = (theta_of(first.y), theta_of(last.y));
    let theta0 = th_a.max(1e-6);
    let kappa0 = if th_b > 0.0 && last.x > first.x { ((th_a / th_b).ln() / (last.x - first.x)).max(0.0) } else { 0.0 };
    let span = (last.x - first.x).abs().max(1e-12);
    let (g, tau) = (fixed.gamma_tot, fixed.tau);
    let th0 = theta0 * (kappa0 * first.x).exp();
    fit(data, &["theta0", "kappa"], &[th0, kappa0], &[1.0, 1.0 / span], move |t, p| {
        ring_down_model(p[0] * (-p[1] * t).exp(), g, tau)
    })
}

/// Linear fit n̄(t) = n̄₀ + ṅ·t against wait time.
pub fn fit_heating_rate(data: &CalibrationDataset) -> Result<FitResult> {
    let w: Vec<f64> = weights(data).iter().map(|w| w * w).collect();
    let sw: f64 = w.iter().sum();
    let mx = data.points.iter().zip(&w).map(|(p, w)| w * p.x).sum::<f64>() / sw;
    let my = data.points.iter().zip(&w).map(|(p, w)| w * p.y).sum::<f64>() / sw;
    let sxx: f64 = data.points.iter().zip(&w).map(|(p, w)| w * (p.x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Data("wait times must not all coincide".into()));
    }
    let sxy: f64 = data.points.iter().zip(&w).map(|(p, w)| w * (p.x - mx) * (p.y - my)).sum();
    let rate = sxy / sxx;
    let n0 = my - rate * mx;
    let xspan = sxx.sqrt().max(1e-12);
    fit(data, &["n0", "rate"], &[n0, rate], &[my.abs().max(1.0), my.abs().max(1.0) / xspan], |t, p| p[0] + p[1] * t)
}
