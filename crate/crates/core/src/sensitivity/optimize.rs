//! τ optimisation and sweeps over the protocol length.

use super::averaged_sensitivity;
use crate::error::{invalid, Error, Result};
use crate::numerics::golden_section;
use crate::quadrature::QuadratureRule;
use crate::types::{NoiseModel, ProtocolFamily, ProtocolSpec};
use crate::units::db_below;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const GRID_POINTS: usize = 64;
/// absolute τ tolerance of the golden-section refinement, s
pub const TAU_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauOptimum {
    pub tau: f64,
    pub delta_sq: f64,
    pub sql: f64,
    pub db_below_sql: f64,
    /// set when the refinement was discarded in favour of the grid point
    pub warning: Option<String>,
}

/// Minimises the averaged sensitivity over the admissible τ of `family`.
///
/// A 64-point grid brackets the minimum, golden section refines it. Points
/// where the moment formulas leave their domain count as +∞.
pub fn optimize_tau(
    family: ProtocolFamily,
    t_total: f64,
    g: f64,
    ion_count: u32,
    noise: &NoiseModel,
    rule: &QuadratureRule,
) -> Result<TauOptimum> {
    if !(t_total > 0.0 && t_total.is_finite()) {
        return invalid(format!("T must be positive, got {t_total}"));
    }
    noise.validate()?;
    let tau_max = family.tau_max(t_total);
    let eval = |tau: f64| -> f64 {
        let spec = ProtocolSpec { variant: family.build(g, tau, t_total), ion_count };
        match averaged_sensitivity(&spec, noise, rule) {
            Ok(r) => r.delta_sq,
            Err(_) => f64::INFINITY,
        }
    };
    let grid: Vec<f64> = (1..=GRID_POINTS).map(|i| tau_max * i as f64 / GRID_POINTS as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| eval(t)).collect();
    let (ibest, &fbest) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is not empty");
    if !fbest.is_finite() {
        return Err(Error::NoSignal);
    }
    let lo = if ibest == 0 { tau_max * 1e-6 } else { grid[ibest - 1] };
    let hi = grid[(ibest + 1).min(GRID_POINTS - 1)];
    let (mut tau, mut best) = golden_section(eval, lo, hi, TAU_TOL);
    // the bracket edges are admissible too
    for t in [lo, hi] {
        let v = eval(t);
        if v < best {
            tau = t;
            best = v;
        }
    }
    let mut warning = None;
    if !(best <= fbest) {
        warning = Some(format!(
            "bracket around tau = {:.6e} s is not unimodal; using the grid minimum",
            grid[ibest]
        ));
        tau = grid[ibest];
        best = fbest;
    }
    let spec = ProtocolSpec { variant: family.build(g, tau, t_total), ion_count };
    let sql = {
        let d = spec.unit_displacement();
        1.0 / (4.0 * d * d)
    };
    Ok(TauOptimum { tau, delta_sq: best, sql, db_below_sql: db_below(sql, best), warning })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T_s")]
    pub t_total: f64,
    #[serde(rename = "tau_opt_s")]
    pub tau_opt: f64,
    pub delta_sq: f64,
    pub db_below_sql: f64,
    pub protocol: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()
    }

    pub fn for_protocol<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.protocol == tag)
    }
}

/// Optimised sensitivity for every (T, family) pair; rows come out in input
/// order, T major.
pub fn sweep(
    families: &[ProtocolFamily],
    t_values: &[f64],
    g: f64,
    ion_count: u32,
    noise: &NoiseModel,
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    let jobs: Vec<(f64, ProtocolFamily)> =
        t_values.iter().flat_map(|&t| families.iter().map(move |&f| (t, f))).collect();
    let results: Vec<Result<TauOptimum>> = jobs
        .par_iter()
        .map(|&(t, f)| optimize_tau(f, t, g, ion_count, noise, rule))
        .collect();
    let mut out = SweepResult::default();
    for ((t, f), r) in jobs.into_iter().zip(results) {
        let r = r?;
        if let Some(w) = r.warning {
            out.warnings.push(format!("{} T = {t:e}: {w}", f.tag()));
        }
        out.rows.push(SweepRow {
            t_total: t,
            tau_opt: r.tau,
            delta_sq: r.delta_sq,
            db_below_sql: r.db_below_sql,
            protocol: f.tag().to_string(),
        });
    }
    Ok(out)
}
