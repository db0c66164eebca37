//! Spin moments at fixed detuning, with thermal phonons and ODF-time dephasing.

use crate::error::{invalid, Result};
use crate::kernels::Kernels;
use crate::numerics::ln_cos_pow;
use crate::types::NoiseModel;
use serde::{Deserialize, Serialize};

/// Moments at the working point (zero drive).
///
/// `slope` is d⟨J_y⟩/dλ where λ scales the drive the kernels were built with;
/// kernels computed at unit β or η give the slope per unit β or η.
/// `jy_sq` is the second moment, which is also the variance since ⟨J_y⟩ = 0 there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub jy_mean: f64,
    pub jy_sq: f64,
    pub slope: f64,
    pub jx_mean: f64,
}

pub fn moments_at_detuning(k: &Kernels, n_ions: u32, noise: &NoiseModel) -> Result<SpinMoments> {
    if n_ions < 2 {
        return invalid(format!("moments need N >= 2, got {n_ions}"));
    }
    let n = n_ions as f64;
    let h2 = k.h_abs_sq();
    let thermal = noise.nbar + 0.5;
    let decay = (-noise.gamma * k.odf_on_time).exp();
    // 1 − e^{−a}cos(·)^{N−2} without cancellation at large N
    let sq = -(-4.0 * h2 * thermal / n + ln_cos_pow(2.0 * k.p / n, n_ions - 2)?).exp_m1();
    let jy_sq = n / 4.0 + n * (n - 1.0) * decay / 8.0 * sq;
    let contrast = (-0.5 * noise.gamma * k.odf_on_time - h2 * thermal / n + ln_cos_pow(k.p / n, n_ions - 1)?).exp();
    Ok(SpinMoments {
        jy_mean: 0.0,
        jy_sq,
        slope: k.q * n.sqrt() * contrast,
        jx_mean: 0.5 * n * contrast,
    })
}

/// ⟨(J₊J₋ + J₋J₊)/2⟩ = N/2 + N(N−1)e^{−Γt}/4 once dephasing has acted for time t.
pub fn deformed_casimir(n_ions: u32, gamma: f64, odf_on_time: f64) -> f64 {
    let n = n_ions as f64;
    n / 2.0 + n * (n - 1.0) * (-gamma * odf_on_time).exp() / 4.0
}

/// Ramsey contrast ⟨σ_x⟩ = exp(−2 Γ_tot τ).
pub fn contrast(tau: f64, gamma_tot: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return invalid(format!("tau must be >= 0, got {tau}"));
    }
    Ok((-2.0 * gamma_tot * tau).exp())
}

/// Large-N read-out protocol without the first ODF pulse: mean and variance of J_y.
pub fn readout_snr_large_n(g: f64, tau: f64, beta: f64, n_ions: u32) -> (f64, f64) {
    let n = n_ions as f64;
    let gt = g * tau;
    (-n.sqrt() * beta * gt, n / 4.0 * (1.0 + gt * gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernels_displacement;
    use num_complex::Complex64;

    fn kern(h: f64, p: f64, q: f64, t: f64) -> Kernels {
        Kernels { h: Complex64::new(h, 0.0), p, q, odf_on_time: t }
    }

    #[test]
    fn perfect_echo_is_a_coherent_state() {
        let m = moments_at_detuning(&kern(0.0, 0.0, 0.0, 1.0), 10, &NoiseModel::ideal()).unwrap();
        assert_eq!(m.jy_sq, 2.5);
        assert_eq!(m.jx_mean, 5.0);
        assert_eq!(m.jy_mean, 0.0);
    }

    #[test]
    fn resonant_slope() {
        let (g, tau, n) = (3.0, 0.4, 16);
        let k = kernels_displacement(g, tau, 0.0, 1.0).unwrap();
        let m = moments_at_detuning(&k, n, &NoiseModel::ideal()).unwrap();
        assert!((m.slope + g * tau * 4.0).abs() < 1e-14);
        assert!((m.jy_sq / (m.slope * m.slope) * 4.0 * g * g * tau * tau - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_single_ion() {
        assert!(moments_at_detuning(&kern(0.0, 0.0, 0.0, 0.0), 1, &NoiseModel::ideal()).is_err());
    }

    #[test]
    fn guard_flags_large_phase() {
        let e = moments_at_detuning(&kern(0.0, 20.0, 1.0, 0.0), 10, &NoiseModel::ideal());
        assert!(e.is_err());
    }

    #[test]
    fn contrast_law() {
        assert_eq!(contrast(0.0, 250.0).unwrap(), 1.0);
        assert!((contrast(2e-3, 250.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let c1 = contrast(1e-3, 250.0).unwrap();
        assert!((contrast(2e-3, 250.0).unwrap() - c1 * c1).abs() < 1e-15);
    }

    #[test]
    fn readout_never_beats_sql() {
        for &gt in &[0.1, 1.0, 10.0, 1e3] {
            let (m, v) = readout_snr_large_n(gt, 1.0, 1e-3, 100);
            let dbeta2 = v / (m / 1e-3).powi(2);
            assert!(dbeta2 > 0.25);
            assert!((dbeta2 - 0.25 - 1.0 / (4.0 * gt * gt)).abs() < 1e-12 * dbeta2);
        }
        let (m, v) = readout_snr_large_n(2.0, 1.0, 0.0, 100);
        assert_eq!(m, 0.0);
        assert_eq!(v, 25.0 * 5.0);
    }

    #[test]
    fn casimir_limits() {
        assert_eq!(deformed_casimir(4, 0.0, 1.0), 2.0 + 3.0);
        assert!((deformed_casimir(4, 1e9, 1.0) - 2.0).abs() < 1e-12);
    }
}
