//! Sensitivity sweeps: (Δβ)² against τ and optimised (Δη)² against T.

use crate::config::{grid_points, invalid, linspace, params, positive, CliResult, Common};
use crate::table::Table;
use ionsense::quadrature::gauss_hermite_rule;
use ionsense::sensitivity::{averaged_sensitivity, perturbative_displacement, sweep};
use ionsense::units::{db_below, efield_sensitivity_from_eta, hz_to_rad, PhysicalConstants};
use ionsense::{NoiseModel, Protocol, ProtocolFamily, ProtocolSpec};
use serde_json::json;

pub const DEFAULT_NODES: usize = 64;

params!(
    /// Frequencies are plain Hz (g/2π, σ/2π); Γ is a rate in 1/s.
    DisplacementParams {
        /// ion count [default: 150]
        n_ions: u32,
        /// spin-phonon coupling g/2π in Hz [default: 3910]
        g_hz: f64,
        /// initial thermal occupation [default: 5]
        nbar: f64,
        /// spin depolarization rate in 1/s [default: 610]
        gamma: f64,
        /// rms detuning spread σ/2π in Hz [default: 40]
        sigma_hz: f64,
        /// first τ in µs [default: 10]
        tau_min_us: f64,
        /// last τ in µs [default: 400]
        tau_max_us: f64,
        /// number of τ values [default: 40]
        points: usize,
    }
);

params!(
    /// Frequencies are plain Hz (g/2π, σ/2π); Γ is a rate in 1/s.
    EFieldParams {
        /// ion count [default: 150]
        n_ions: u32,
        /// spin-phonon coupling g/2π in Hz [default: 3880]
        g_hz: f64,
        /// initial thermal occupation [default: 5]
        nbar: f64,
        /// spin depolarization rate in 1/s [default: 520]
        gamma: f64,
        /// rms detuning spread σ/2π in Hz [default: 40]
        sigma_hz: f64,
        /// first protocol length T in ms [default: 0.2]
        t_min_ms: f64,
        /// last protocol length T in ms [default: 2]
        t_max_ms: f64,
        /// number of T values [default: 37]
        points: usize,
        /// axial trap frequency in Hz, for the field conversion [default: 1.59e6]
        trap_freq_hz: f64,
    }
);

fn nodes(common: &Common) -> usize {
    common.nodes.unwrap_or(DEFAULT_NODES)
}

fn ion_count(n: Option<u32>) -> CliResult<u32> {
    match n.unwrap_or(150) {
        0 => invalid("n_ions must be at least 1"),
        n => Ok(n),
    }
}

pub fn displacement_sweep(p: &DisplacementParams, common: &Common) -> CliResult<Table> {
    let n_ions = ion_count(p.n_ions)?;
    let g_hz = positive("g_hz", p.g_hz.unwrap_or(3910.0))?;
    let nbar = p.nbar.unwrap_or(5.0);
    let gamma = p.gamma.unwrap_or(610.0);
    let sigma_hz = p.sigma_hz.unwrap_or(40.0);
    let tau_min = positive("tau_min_us", p.tau_min_us.unwrap_or(10.0))?;
    let tau_max = positive("tau_max_us", p.tau_max_us.unwrap_or(400.0))?;
    let points = grid_points("points", p.points.unwrap_or(40))?;
    if tau_max < tau_min {
        return invalid(format!("tau_max_us ({tau_max}) is below tau_min_us ({tau_min})"));
    }
    let n_nodes = nodes(common);
    let g = hz_to_rad(g_hz);
    let noise = NoiseModel::new(hz_to_rad(sigma_hz), nbar, gamma, 1.0)?;
    let excess = match common.excess_noise {
        Some(f) => Some(NoiseModel::new(noise.sigma, nbar, gamma, f)?.excess_noise_factor),
        None => None,
    };
    let rule = gauss_hermite_rule(noise.sigma, n_nodes)?;

    let mut columns = vec!["tau_s", "delta_sq_exact", "delta_sq_perturbative", "sql", "db_below_sql"];
    if excess.is_some() {
        columns.extend(["delta_sq_excess", "db_below_sql_excess"]);
    }
    let parameters = json!({
        "n_ions": n_ions, "g_hz": g_hz, "nbar": nbar, "gamma": gamma, "sigma_hz": sigma_hz,
        "tau_min_us": tau_min, "tau_max_us": tau_max, "points": points,
        "nodes": n_nodes, "excess_noise": excess,
    });
    let mut table = Table::new("displacement-sweep", columns, parameters);
    for tau in linspace(tau_min, tau_max, points).into_iter().map(|us| us / 1e6) {
        let spec = ProtocolSpec::new(Protocol::Displacement { g, tau, beta: 1.0 }, n_ions)?;
        let exact = averaged_sensitivity(&spec, &noise, &rule)?;
        let pert = perturbative_displacement(g, tau, &noise);
        if !pert.valid {
            table.warnings.push(format!("tau = {tau:e} s: perturbative expansion outside its range"));
        }
        let mut row = vec![tau, exact.delta_sq, pert.total(), exact.sql, exact.db_below_sql];
        if let Some(f) = excess {
            let d = exact.delta_sq * f * f;
            row.extend([d, db_below(exact.sql, d)]);
        }
        table.push(row);
    }
    Ok(table)
}

pub fn efield_sweep(p: &EFieldParams, common: &Common) -> CliResult<Table> {
    let n_ions = ion_count(p.n_ions)?;
    let g_hz = positive("g_hz", p.g_hz.unwrap_or(3880.0))?;
    let nbar = p.nbar.unwrap_or(5.0);
    let gamma = p.gamma.unwrap_or(520.0);
    let sigma_hz = p.sigma_hz.unwrap_or(40.0);
    let t_min = positive("t_min_ms", p.t_min_ms.unwrap_or(0.2))?;
    let t_max = positive("t_max_ms", p.t_max_ms.unwrap_or(2.0))?;
    let points = grid_points("points", p.points.unwrap_or(37))?;
    let trap_hz = positive("trap_freq_hz", p.trap_freq_hz.unwrap_or(1.59e6))?;
    if t_max < t_min {
        return invalid(format!("t_max_ms ({t_max}) is below t_min_ms ({t_min})"));
    }
    let excess = common.excess_noise.unwrap_or(1.0);
    let n_nodes = nodes(common);
    let noise = NoiseModel::new(hz_to_rad(sigma_hz), nbar, gamma, excess)?;
    let consts = PhysicalConstants { trap_freq: hz_to_rad(trap_hz), ..PhysicalConstants::default() };
    let rule = gauss_hermite_rule(noise.sigma, n_nodes)?;
    let ts: Vec<f64> = linspace(t_min, t_max, points).into_iter().map(|ms| ms / 1e3).collect();
    let families = [ProtocolFamily::QuantumEField, ProtocolFamily::ClassicalEField];
    let result = sweep(&families, &ts, hz_to_rad(g_hz), n_ions, &noise, &rule)?;

    let parameters = json!({
        "n_ions": n_ions, "g_hz": g_hz, "nbar": nbar, "gamma": gamma, "sigma_hz": sigma_hz,
        "t_min_ms": t_min, "t_max_ms": t_max, "points": points, "trap_freq_hz": trap_hz,
        "nodes": n_nodes, "excess_noise": excess,
    });
    let columns = vec![
        "T_s",
        "tau_opt_quantum",
        "tau_opt_classical",
        "delta_eta_sq_quantum",
        "delta_eta_sq_classical",
        "sql",
        "eps_Vm_quantum",
    ];
    let mut table = Table::new("efield-sweep", columns, parameters);
    table.warnings = result.warnings.clone();
    // rows come T-major in family order
    for (t, pair) in ts.iter().zip(result.rows.chunks_exact(2)) {
        let (q, c) = (&pair[0], &pair[1]);
        let eps = efield_sensitivity_from_eta(q.delta_sq.sqrt(), *t, &consts, n_ions)?;
        table.push(vec![*t, q.tau_opt, c.tau_opt, q.delta_sq, c.delta_sq, 1.0 / (4.0 * t * t), eps]);
    }
    Ok(table)
}
