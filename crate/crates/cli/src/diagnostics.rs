//! Single-shot SNR, Rényi entropy and Wigner grids.

use crate::config::{grid_points, invalid, linspace, params, positive, CliResult, Common};
use crate::table::Table;
use clap::ValueEnum;
use ionsense::entanglement::{renyi_entropy, wigner_hybrid_plus, wigner_reduced_boson};
use ionsense::sensitivity::snr_single_shot;
use ionsense::units::hz_to_rad;
use ionsense::NoiseModel;
use serde::{Deserialize, Serialize};
use serde_json::json;

params!(
    /// Frequencies are plain Hz (g/2π, σ/2π); Γ is a rate in 1/s.
    SnrParams {
        /// spin-phonon coupling g/2π in Hz [default: 3910]
        g_hz: f64,
        /// echo arm τ in µs [default: 200]
        tau_us: f64,
        /// initial thermal occupation [default: 5]
        nbar: f64,
        /// spin depolarization rate in 1/s [default: 500]
        gamma: f64,
        /// rms detuning spread σ/2π in Hz [default: 40]
        sigma_hz: f64,
        /// largest β [default: 1.5]
        beta_max: f64,
        /// number of β values from 0 [default: 31]
        points: usize,
    }
);

params!(
    RenyiParams {
        /// spin-phonon coupling g/2π in Hz [default: 3910]
        g_hz: f64,
        /// echo arm τ in µs [default: 200]
        tau_us: f64,
        /// number of times from 0 to 2τ [default: 41]
        points: usize,
    }
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WignerKind {
    /// oscillator after tracing out the spins
    Reduced,
    /// joint spin-oscillator quadratures (x₊, p₊)
    Hybrid,
}

params!(
    WignerParams {
        /// which Wigner function [default: reduced]
        kind: WignerKind,
        /// dimensionless gτ [default: 1]
        g_tau: f64,
        /// grid spans [-w, w] in both quadratures [default: 4]
        half_width: f64,
        /// grid points per axis [default: 81]
        points: usize,
    }
);

pub fn snr(p: &SnrParams, common: &Common) -> CliResult<Table> {
    let g_hz = positive("g_hz", p.g_hz.unwrap_or(3910.0))?;
    let tau_us = positive("tau_us", p.tau_us.unwrap_or(200.0))?;
    let nbar = p.nbar.unwrap_or(5.0);
    let gamma = p.gamma.unwrap_or(500.0);
    let sigma_hz = p.sigma_hz.unwrap_or(40.0);
    let beta_max = positive("beta_max", p.beta_max.unwrap_or(1.5))?;
    let points = grid_points("points", p.points.unwrap_or(31))?;
    let excess = common.excess_noise.unwrap_or(1.0);
    let noise = NoiseModel::new(hz_to_rad(sigma_hz), nbar, gamma, excess)?;
    let parameters = json!({
        "g_hz": g_hz, "tau_us": tau_us, "nbar": nbar, "gamma": gamma, "sigma_hz": sigma_hz,
        "beta_max": beta_max, "points": points, "excess_noise": excess,
    });
    let mut table = Table::new("snr", vec!["beta", "snr"], parameters);
    let (g, tau) = (hz_to_rad(g_hz), tau_us / 1e6);
    for beta in linspace(0.0, beta_max, points) {
        table.push(vec![beta, snr_single_shot(g, tau, beta, &noise) / excess]);
    }
    Ok(table)
}

pub fn renyi(p: &RenyiParams) -> CliResult<Table> {
    let g_hz = positive("g_hz", p.g_hz.unwrap_or(3910.0))?;
    let tau_us = positive("tau_us", p.tau_us.unwrap_or(200.0))?;
    let points = grid_points("points", p.points.unwrap_or(41))?;
    let parameters = json!({ "g_hz": g_hz, "tau_us": tau_us, "points": points });
    let mut table = Table::new("renyi", vec!["t_s", "renyi_s2"], parameters);
    let (g, tau) = (hz_to_rad(g_hz), tau_us / 1e6);
    for t in linspace(0.0, 2.0 * tau, points) {
        table.push(vec![t, renyi_entropy(g, tau, t)?]);
    }
    Ok(table)
}

pub fn wigner(p: &WignerParams) -> CliResult<Table> {
    let kind = p.kind.unwrap_or(WignerKind::Reduced);
    let g_tau = p.g_tau.unwrap_or(1.0);
    if !(g_tau.is_finite() && g_tau >= 0.0) {
        return invalid(format!("g_tau must be >= 0, got {g_tau}"));
    }
    let w = positive("half_width", p.half_width.unwrap_or(4.0))?;
    let points = grid_points("points", p.points.unwrap_or(81))?;
    let parameters = json!({ "kind": kind, "g_tau": g_tau, "half_width": w, "points": points });
    let mut table = Table::new("wigner", vec!["x", "p", "W"], parameters);
    let axis = linspace(-w, w, points);
    let f = match kind {
        WignerKind::Reduced => wigner_reduced_boson,
        WignerKind::Hybrid => wigner_hybrid_plus,
    };
    for &x in &axis {
        for &q in &axis {
            table.push(vec![x, q, f(x, q, g_tau)]);
        }
    }
    Ok(table)
}
