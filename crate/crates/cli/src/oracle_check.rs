//! Closed-form moments against the brute-force Dicke×Fock evolution.

use crate::config::{params, positive, CliError, CliResult, Format};
use crate::table::to_json_bytes;
use ionsense::kernels::kernels_for;
use ionsense::moments::moments_at_detuning;
use ionsense::oracle::evolve_exact_auto;
use ionsense::{NoiseModel, Protocol, ProtocolSpec, SpinMoments};
use serde::Serialize;

params!(
    OracleParams {
        /// largest accepted relative error [default: 1e-6]
        tolerance: f64,
    }
);

#[derive(Debug, Clone, Serialize)]
pub struct OracleCase {
    pub protocol: &'static str,
    pub n_ions: u32,
    pub nbar: f64,
    pub delta_over_g: f64,
    pub g_tau: f64,
    pub rel_err_jx: f64,
    pub rel_err_jy_sq: f64,
    pub rel_err_slope: f64,
    pub max_rel_err: f64,
    pub n_cut: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckReport {
    pub command: &'static str,
    pub tolerance: f64,
    pub max_rel_err: f64,
    pub pass: bool,
    pub cases: Vec<OracleCase>,
}

impl OracleCheckReport {
    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Json => to_json_bytes(self),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for c in &self.cases {
                    w.serialize(c).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// (protocol, N, n̄, δ/g, gτ) with g = 1. The displacement block is the full
/// grid; the field protocols get a smaller spot check.
fn suite() -> Vec<(&'static str, u32, f64, f64, f64)> {
    let mut cases = Vec::new();
    for n in [2u32, 3, 4, 6] {
        for nbar in [0.0, 0.5, 2.0] {
            for dg in [0.0, 0.05, 0.2] {
                for gt in [0.5, 1.0, 2.0] {
                    cases.push(("displacement", n, nbar, dg, gt));
                }
            }
        }
    }
    for proto in ["classical", "quantum"] {
        for n in [2u32, 4] {
            for dg in [0.0, 0.05] {
                for gt in [0.5, 1.0] {
                    cases.push((proto, n, 0.5, dg, gt));
                }
            }
        }
    }
    cases
}

fn protocol(name: &str, tau: f64) -> Protocol {
    match name {
        "displacement" => Protocol::Displacement { g: 1.0, tau, beta: 0.0 },
        "classical" => Protocol::ClassicalEField { g: 1.0, tau, t_total: 1.5 * tau, eta: 0.0 },
        _ => Protocol::QuantumEField { g: 1.0, tau, t_total: 2.5 * tau, eta: 0.0 },
    }
}

fn compare(cf: &SpinMoments, or: &SpinMoments) -> [f64; 3] {
    [rel(cf.jx_mean, or.jx_mean), rel(cf.jy_sq, or.jy_sq), rel(cf.slope, or.slope)]
}

pub fn oracle_check(p: &OracleParams) -> CliResult<OracleCheckReport> {
    let tolerance = positive("tolerance", p.tolerance.unwrap_or(1e-6))?;
    let mut cases = Vec::new();
    for (name, n, nbar, dg, gt) in suite() {
        let spec = ProtocolSpec::new(protocol(name, gt), n)?;
        let noise = NoiseModel::new(0.0, nbar, 0.0, 1.0)?;
        let cf = moments_at_detuning(&kernels_for(&spec.unit_drive(), dg)?, n, &noise)?;
        let report = evolve_exact_auto(&spec, dg, nbar).map_err(|e| {
            CliError::Numerical(format!("{name} N={n} nbar={nbar} d/g={dg} gt={gt}: {e}"))
        })?;
        let [jx, jy, sl] = compare(&cf, &report.moments);
        cases.push(OracleCase {
            protocol: name,
            n_ions: n,
            nbar,
            delta_over_g: dg,
            g_tau: gt,
            rel_err_jx: jx,
            rel_err_jy_sq: jy,
            rel_err_slope: sl,
            max_rel_err: jx.max(jy).max(sl),
            n_cut: report.n_cut,
        });
    }
    let max_rel_err = cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
    Ok(OracleCheckReport { command: "oracle-check", tolerance, max_rel_err, pass: max_rel_err < tolerance, cases })
}
