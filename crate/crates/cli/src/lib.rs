//! Command-line front end for `ionsense`.
//!
//! All frequencies on the command line and in config files are plain Hz
//! (`--g-hz 3910` means g = 2π × 3910 rad/s). Rates such as Γ are in 1/s.

pub mod calibrate;
pub mod config;
pub mod diagnostics;
pub mod oracle_check;
pub mod sweeps;
pub mod table;

use calibrate::{CalibrateParams, FitKind};
use clap::{Parser, Subcommand};
use config::{load, CliError, CliResult, Common, Format};
use diagnostics::{RenyiParams, SnrParams, WignerParams};
use oracle_check::OracleParams;
use serde::de::DeserializeOwned;
use std::path::PathBuf;
use sweeps::{DisplacementParams, EFieldParams};

#[derive(Debug, Parser)]
#[command(name = "ionsense", version, about = "Echo-protocol displacement and field sensing: sweeps, diagnostics, oracle checks and calibration fits")]
pub struct Cli {
    /// JSON file with parameters for the command; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// output format [default: csv]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Gauss-Hermite nodes for the detuning average [default: 64]
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// factor multiplying the projection-noise amplitude
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub excess_noise: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// (Δβ)² of the displacement echo over a τ grid, full numerics and perturbative
    DisplacementSweep(DisplacementParams),
    /// τ-optimised (Δη)² of both field protocols over a grid of protocol lengths
    EfieldSweep(EFieldParams),
    /// single-shot signal-to-noise against β
    Snr(SnrParams),
    /// second Rényi entropy of the oscillator along the echo
    Renyi(RenyiParams),
    /// Wigner function on a square (x, p) grid
    Wigner(WignerParams),
    /// closed-form moments against the brute-force simulator; exits 3 on a mismatch
    OracleCheck(OracleParams),
    /// least-squares calibration from a CSV file with header x,y[,yerr]
    Calibrate {
        #[arg(value_enum)]
        kind: FitKind,
        csv: PathBuf,
        #[command(flatten)]
        params: CalibrateParams,
    },
}

/// What a run produced. `failure` is set when the output is complete but the
/// run must still exit non-zero.
#[derive(Debug)]
pub struct Outcome {
    pub body: Vec<u8>,
    pub out: Option<PathBuf>,
    pub warnings: Vec<String>,
    pub failure: Option<CliError>,
}

fn merged<P: DeserializeOwned + Default + Clone>(
    cli: &Cli,
    flags: &P,
    over: fn(P, P) -> P,
) -> CliResult<(Common, P)> {
    let (file_common, file_params) = load::<P>(cli.config.as_deref())?;
    let common = Common { format: cli.format, out: cli.out.clone(), nodes: cli.nodes, excess_noise: cli.excess_noise }
        .over(file_common);
    Ok((common, over(flags.clone(), file_params)))
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let done = |common: Common, body: Vec<u8>, warnings: Vec<String>, failure: Option<CliError>| Outcome {
        body,
        out: common.out,
        warnings,
        failure,
    };
    match &cli.command {
        Command::DisplacementSweep(f) => {
            let (c, p) = merged(cli, f, DisplacementParams::over)?;
            let t = sweeps::displacement_sweep(&p, &c)?;
            let body = t.render(c.format.unwrap_or_default())?;
            Ok(done(c, body, t.warnings, None))
        }
        Command::EfieldSweep(f) => {
            let (c, p) = merged(cli, f, EFieldParams::over)?;
            let t = sweeps::efield_sweep(&p, &c)?;
            let body = t.render(c.format.unwrap_or_default())?;
            Ok(done(c, body, t.warnings, None))
        }
        Command::Snr(f) => {
            let (c, p) = merged(cli, f, SnrParams::over)?;
            let t = diagnostics::snr(&p, &c)?;
            let body = t.render(c.format.unwrap_or_default())?;
            Ok(done(c, body, t.warnings, None))
        }
        Command::Renyi(f) => {
            let (c, p) = merged(cli, f, RenyiParams::over)?;
            let t = diagnostics::renyi(&p)?;
            let body = t.render(c.format.unwrap_or_default())?;
            Ok(done(c, body, t.warnings, None))
        }
        Command::Wigner(f) => {
            let (c, p) = merged(cli, f, WignerParams::over)?;
            let t = diagnostics::wigner(&p)?;
            let body = t.render(c.format.unwrap_or_default())?;
            Ok(done(c, body, t.warnings, None))
        }
        Command::OracleCheck(f) => {
            let (c, p) = merged(cli, f, OracleParams::over)?;
            let r = oracle_check::oracle_check(&p)?;
            let body = r.render(c.format.unwrap_or_default())?;
            let summary = format!(
                "oracle-check: {} cases, max relative error {:.3e} (tolerance {:e})",
                r.cases.len(),
                r.max_rel_err,
                r.tolerance
            );
            let failure = (!r.pass).then(|| CliError::Numerical(summary.clone()));
            Ok(done(c, body, vec![summary], failure))
        }
        Command::Calibrate { kind, csv, params } => {
            let (c, p) = merged(cli, params, CalibrateParams::over)?;
            let r = calibrate::calibrate(*kind, csv, &p)?;
            // a fit result is a document, not a table
            let body = r.render(c.format.unwrap_or(Format::Json))?;
            Ok(done(c, body, Vec::new(), None))
        }
    }
}
