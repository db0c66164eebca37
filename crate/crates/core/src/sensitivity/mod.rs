//! Detuning-averaged sensitivities, their perturbative approximations and
//! reference bounds.

mod optimize;
mod perturbative;

pub use optimize::{optimize_tau, sweep, SweepResult, SweepRow, TauOptimum, GRID_POINTS, TAU_TOL};
pub use perturbative::{
    perturbative_classical_efield, perturbative_displacement, perturbative_quantum_efield, snr_single_shot,
    PerturbativeEstimate, PerturbativeTerm, VALIDITY_LIMIT,
};

use crate::error::{Error, Result};
use crate::kernels::kernels_for;
use crate::moments::{moments_at_detuning, SpinMoments};
use crate::quadrature::QuadratureRule;
use crate::types::{NoiseModel, Protocol, ProtocolSpec};
use crate::units::db_below;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// averaged ⟨J_y²⟩, inflated by the excess-noise factor squared
    pub variance: f64,
    /// averaged d⟨J_y⟩/dβ or d⟨J_y⟩/dη
    pub slope: f64,
    pub delta_sq: f64,
    pub sql: f64,
    pub thermal_bound: f64,
    pub db_below_sql: f64,
}

/// (Δβ)² or (Δη)² with ⟨J_y²⟩ and the slope averaged separately over the rule.
pub fn averaged_sensitivity(spec: &ProtocolSpec, noise: &NoiseModel, rule: &QuadratureRule) -> Result<SensitivityReport> {
    spec.validate()?;
    noise.validate()?;
    let unit = spec.unit_drive();
    let eval = |&d: &f64| -> Result<SpinMoments> {
        let k = kernels_for(&unit, d)?;
        moments_at_detuning(&k, spec.ion_count, noise)
    };
    // closed forms are too cheap to be worth the thread hop
    let per_node: Vec<Result<SpinMoments>> = match spec.variant {
        Protocol::ReadoutOnly { .. } | Protocol::Custom(_) => rule.nodes.par_iter().map(eval).collect(),
        _ => rule.nodes.iter().map(eval).collect(),
    };
    let mut jy = 0.0;
    let mut slope = 0.0;
    for (m, w) in per_node.into_iter().zip(&rule.weights) {
        let m = m?;
        jy += w * m.jy_sq;
        slope += w * m.slope;
    }
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::NoSignal);
    }
    let variance = jy * noise.excess_noise_factor.powi(2);
    let delta_sq = variance / (slope * slope);
    let d = spec.unit_displacement();
    let sql = 1.0 / (4.0 * d * d);
    Ok(SensitivityReport {
        variance,
        slope,
        delta_sq,
        sql,
        thermal_bound: (2.0 * noise.nbar + 1.0) * sql,
        db_below_sql: db_below(sql, delta_sq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub sql_beta: f64,
    pub sql_eta: f64,
    pub thermal_eta: f64,
    pub thermal_beta: f64,
    /// quantum Cramér–Rao value 1/(4 + 4g²τ²)
    pub cramer_rao_beta: f64,
}

pub fn bounds(t_total: f64, nbar: f64, g: f64, tau: f64) -> Result<Bounds> {
    if !(t_total > 0.0) {
        return crate::error::invalid(format!("T must be positive, got {t_total}"));
    }
    let sql_eta = 1.0 / (4.0 * t_total * t_total);
    let th = 2.0 * nbar + 1.0;
    let gt = g * tau;
    Ok(Bounds {
        sql_beta: 0.25,
        sql_eta,
        thermal_eta: th * sql_eta,
        thermal_beta: th * 0.25,
        cramer_rao_beta: 1.0 / (4.0 + 4.0 * gt * gt),
    })
}
