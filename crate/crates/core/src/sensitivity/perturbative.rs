//! Leading-order expansions in σ of the averaged sensitivities.

use crate::types::NoiseModel;
use serde::{Deserialize, Serialize};

/// σ × protocol duration beyond which the expansions are not trusted.
pub const VALIDITY_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeTerm {
    pub label: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbativeEstimate {
    pub terms: Vec<PerturbativeTerm>,
    /// false once σ × duration exceeds [`VALIDITY_LIMIT`]
    pub valid: bool,
}

impl PerturbativeEstimate {
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }
}

fn term(label: &'static str, value: f64) -> PerturbativeTerm {
    PerturbativeTerm { label, value }
}

/// (Δβ)² of the displacement echo.
pub fn perturbative_displacement(g: f64, tau: f64, noise: &NoiseModel) -> PerturbativeEstimate {
    let (s2, nb) = (noise.sigma * noise.sigma, noise.nbar);
    let e = (2.0 * noise.gamma * tau).exp();
    let gt2 = g * g * tau * tau;
    PerturbativeEstimate {
        terms: vec![
            term("ideal", e / (4.0 * gt2)),
            term("signal reduction", s2 * e / (12.0 * g * g)),
            term("spin-phonon correlations", s2 * tau * tau * (nb + 0.5) / 2.0),
            term("spin-spin correlations", g * g * s2 * tau.powi(4) / 9.0),
        ],
        valid: 2.0 * noise.sigma * tau <= VALIDITY_LIMIT,
    }
}

/// (Δη)² when the ODF is only applied at the end of the drive.
pub fn perturbative_classical_efield(g: f64, tau: f64, t_total: f64, noise: &NoiseModel) -> PerturbativeEstimate {
    let (s2, nb) = (noise.sigma * noise.sigma, noise.nbar);
    let e = (noise.gamma * tau).exp();
    let l2 = (2.0 * t_total - tau).powi(2);
    let gt2 = g * g * tau * tau;
    let t = t_total;
    PerturbativeEstimate {
        terms: vec![
            term("ideal", e / (gt2 * l2)),
            term("ideal spin-phonon correlations", (2.0 * nb + 1.0) / l2),
            term("signal reduction", s2 * e * (2.0 * t * t - 2.0 * tau * t + tau * tau) / (6.0 * gt2 * l2)),
            term("spin-phonon correlations", s2 * (nb + 0.5) / 6.0),
            term("spin-spin correlations", g * g * s2 * tau.powi(4) / (36.0 * l2)),
        ],
        valid: noise.sigma * t_total <= VALIDITY_LIMIT,
    }
}

/// (Δη)² when the drive sits inside the echo.
pub fn perturbative_quantum_efield(g: f64, tau: f64, t_total: f64, noise: &NoiseModel) -> PerturbativeEstimate {
    let (s2, nb) = (noise.sigma * noise.sigma, noise.nbar);
    let e = (2.0 * noise.gamma * tau).exp();
    let t = t_total;
    let gt2 = g * g * tau * tau;
    let r2 = (t - tau).powi(2);
    PerturbativeEstimate {
        terms: vec![
            term("ideal", e / (4.0 * gt2 * r2)),
            term("signal reduction", s2 * e * (2.0 * t * t - tau * t + tau * tau) / (24.0 * gt2 * r2)),
            term("spin-phonon correlations", s2 * (2.0 * nb + 1.0) / 4.0),
            term("spin-spin correlations", gt2 * s2 * (3.0 * t - 4.0 * tau).powi(2) / (36.0 * r2)),
        ],
        valid: noise.sigma * t_total <= VALIDITY_LIMIT,
    }
}

/// Single-shot β/Δβ of the displacement echo with the signal-reduction term dropped.
pub fn snr_single_shot(g: f64, tau: f64, beta: f64, noise: &NoiseModel) -> f64 {
    let (gt, s2) = (g * tau, noise.sigma * noise.sigma);
    let damp = (-noise.gamma * tau).exp();
    let spread = (2.0 * noise.nbar + 1.0) * gt * gt * s2 * tau * tau + 4.0 / 9.0 * gt.powi(4) * s2 * tau * tau;
    2.0 * gt * beta * damp / (1.0 + damp * damp * spread).sqrt()
}
