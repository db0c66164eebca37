//! Gaussian phase-space diagnostics of the echo: Rényi entropy, hybrid
//! squeezing and Wigner functions. Vacuum quadrature variance is 1/2.

use crate::error::{invalid, Result};
use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Second Rényi entropy of the oscillator along the echo, ½ ln(1 + g²t²)
/// on the way out and mirrored on the way back.
pub fn renyi_entropy(g: f64, tau: f64, t: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return invalid(format!("tau must be positive, got {tau}"));
    }
    if !(0.0..=2.0 * tau).contains(&t) {
        return invalid(format!("t = {t} lies outside [0, 2 tau]"));
    }
    let s = if t <= tau { t } else { 2.0 * tau - t };
    Ok(0.5 * (g * g * s * s).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingParameters {
    /// 1/(1 + a² + a√(2 + a²)) with a = gτ
    pub xi_sq: f64,
    /// arctan((√(4 + a²) − a)/2)
    pub phi: f64,
    /// inverse of the largest eigenvalue of the hybrid Wigner quadratic form
    pub xi_sq_eigen: f64,
}

/// The closed-form ξ² and the eigenvalue route disagree away from gτ = 0;
/// both are returned.
pub fn squeezing_parameters(g_tau: f64) -> Result<SqueezingParameters> {
    if !(g_tau >= 0.0 && g_tau.is_finite()) {
        return invalid(format!("g tau must be >= 0, got {g_tau}"));
    }
    let a = g_tau;
    let q = hybrid_quadratic_form(a);
    let lmax = SymmetricEigen::new(q).eigenvalues.max();
    Ok(SqueezingParameters {
        xi_sq: 1.0 / (1.0 + a * a + a * (2.0 + a * a).sqrt()),
        phi: (((4.0 + a * a).sqrt() - a) / 2.0).atan(),
        xi_sq_eigen: 1.0 / lmax,
    })
}

/// Q with W ∝ exp(−vᵀQv), v = (x₊, p₊).
fn hybrid_quadratic_form(a: f64) -> Matrix2<f64> {
    Matrix2::new(1.0 + a * a, -a, -a, 1.0)
}

/// W(x₊, p₊) = exp[−x₊² − (p₊ − gτ x₊)²]/π
pub fn wigner_hybrid_plus(x: f64, p: f64, g_tau: f64) -> f64 {
    let r = p - g_tau * x;
    (-x * x - r * r).exp() / PI
}

/// Oscillator Wigner function after tracing out the spins at time τ.
pub fn wigner_reduced_boson(x: f64, p: f64, g_tau: f64) -> f64 {
    let s = 1.0 + g_tau * g_tau;
    (-x * x).exp() * (-p * p / s).exp() / (PI * s.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPhaseSpace {
    pub covariance: Matrix2<f64>,
    pub mean: Vector2<f64>,
}

impl GaussianPhaseSpace {
    pub fn new(covariance: Matrix2<f64>, mean: Vector2<f64>) -> Result<Self> {
        if (covariance[(0, 1)] - covariance[(1, 0)]).abs() > 1e-12 * covariance.norm() {
            return invalid("covariance must be symmetric");
        }
        if covariance.determinant() < 0.25 * (1.0 - 1e-12) {
            return invalid("covariance violates the uncertainty bound det >= 1/4");
        }
        Ok(Self { covariance, mean })
    }

    pub fn hybrid_plus(g_tau: f64) -> Self {
        let cov = (2.0 * hybrid_quadratic_form(g_tau)).try_inverse().expect("det Q = 1");
        Self { covariance: cov, mean: Vector2::zeros() }
    }

    pub fn reduced_boson(g_tau: f64) -> Self {
        Self {
            covariance: Matrix2::new(0.5, 0.0, 0.0, 0.5 * (1.0 + g_tau * g_tau)),
            mean: Vector2::zeros(),
        }
    }

    pub fn density(&self, x: f64, p: f64) -> f64 {
        let v = Vector2::new(x, p) - self.mean;
        let inv = self.covariance.try_inverse().expect("covariance is positive definite");
        (-0.5 * v.dot(&(inv * v))).exp() / (2.0 * PI * self.covariance.determinant().sqrt())
    }

    /// Tr ρ² = 2π∫W² = 1/(2√det Σ)
    pub fn purity(&self) -> f64 {
        0.5 / self.covariance.determinant().sqrt()
    }
}

/// Trapezoid rule on an n×n grid over [−L, L]² of a function of (x, p).
/// Spectrally accurate for the Gaussians here.
pub fn phase_space_integral<F: Fn(f64, f64) -> f64>(f: F, half_width: f64, n: usize) -> f64 {
    let h = 2.0 * half_width / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = -half_width + i as f64 * h;
        let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut row = 0.0;
        for j in 0..n {
            let p = -half_width + j as f64 * h;
            let wp = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            row += wp * f(x, p);
        }
        acc += wx * row;
    }
    acc * h * h
}

/// 2π∫W² of the reduced oscillator state by direct quadrature.
pub fn reduced_boson_purity_numeric(g_tau: f64) -> f64 {
    let l = 12.0 * (0.5 * (1.0 + g_tau * g_tau)).sqrt();
    2.0 * PI * phase_space_integral(|x, p| wigner_reduced_boson(x, p, g_tau).powi(2), l, 801)
}
