use crate::config::{invalid, params, CliError, CliResult, Format};
use crate::table::to_json_bytes;
use clap::ValueEnum;
use ionsense::calibration::{
    fit_contrast, fit_heating_rate, fit_ring_down, fit_sigma, gamma_el_from_total, per_ion_heating_rate, FitParam,
    RingDownFixed, SigmaFitFixed,
};
use ionsense::units::{hz_to_rad, rad_to_hz};
use ionsense::{CalibrationDataset, FitResult};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// ⟨P↑⟩ against τ: detuning spread σ
    Sigma,
    /// contrast against total ODF time: Γ_tot
    Contrast,
    /// ⟨P↑⟩ against wait time: drive ring-down κ
    Ringdown,
    /// n̄ against wait time: heating rate
    Heating,
}

params!(
    /// Fixed inputs. g is plain Hz; Γ_tot is a rate in 1/s.
    CalibrateParams {
        /// spin-phonon coupling g/2π in Hz (sigma) [default: 3910]
        g_hz: f64,
        /// thermal occupation (sigma) [default: 5]
        nbar: f64,
        /// ion count (sigma, heating) [default: 150]
        n_ions: u32,
        /// total depolarization rate in 1/s (sigma, ringdown) [default: 250]
        gamma_tot: f64,
        /// echo arm τ of the ring-down probe in µs (ringdown, required)
        tau_us: f64,
    }
);

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub command: &'static str,
    pub kind: FitKind,
    pub fit: FitResult,
    /// quantities converted from the fitted parameters
    pub derived: Vec<FitParam>,
}

impl CalibrationReport {
    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Json => to_json_bytes(self),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for p in self.fit.params.iter().chain(&self.derived) {
                    w.serialize(p).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

fn derived(name: &str, value: f64, std_error: f64) -> FitParam {
    FitParam { name: name.to_string(), value, std_error }
}

pub fn calibrate(kind: FitKind, csv_path: &Path, p: &CalibrateParams) -> CliResult<CalibrationReport> {
    let file = std::fs::File::open(csv_path).map_err(|e| CliError::Invalid(format!("{}: {e}", csv_path.display())))?;
    let data = CalibrationDataset::from_csv(file)?;
    let n_ions = p.n_ions.unwrap_or(150);
    let gamma_tot = p.gamma_tot.unwrap_or(250.0);
    let (fit, derived) = match kind {
        FitKind::Sigma => {
            let fixed = SigmaFitFixed { g: hz_to_rad(p.g_hz.unwrap_or(3910.0)), nbar: p.nbar.unwrap_or(5.0), n_ions, gamma_tot };
            let fit = fit_sigma(&data, &fixed)?;
            let s = &fit.params[0];
            let d = vec![derived("sigma_hz", rad_to_hz(s.value), rad_to_hz(s.std_error))];
            (fit, d)
        }
        FitKind::Contrast => {
            let fit = fit_contrast(&data)?;
            let g = &fit.params[0];
            let d = vec![derived("gamma_el", gamma_el_from_total(g.value), gamma_el_from_total(g.std_error))];
            (fit, d)
        }
        FitKind::Ringdown => {
            let Some(tau_us) = p.tau_us else {
                return invalid("calibrate ringdown needs --tau-us");
            };
            let fit = fit_ring_down(&data, &RingDownFixed { gamma_tot, tau: tau_us * 1e-6 })?;
            let k = fit.param("kappa").cloned().expect("ring-down fit reports kappa");
            let d = if k.value > 0.0 {
                vec![derived("decay_time_s", 1.0 / k.value, k.std_error / (k.value * k.value))]
            } else {
                Vec::new()
            };
            (fit, d)
        }
        FitKind::Heating => {
            let fit = fit_heating_rate(&data)?;
            let r = fit.param("rate").cloned().expect("heating fit reports rate");
            let d = vec![derived(
                "rate_per_ion",
                per_ion_heating_rate(r.value, n_ions)?,
                per_ion_heating_rate(r.std_error, n_ions)?,
            )];
            (fit, d)
        }
    };
    Ok(CalibrationReport { command: "calibrate", kind, fit, derived })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(rows: &[(f64, f64)]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y").unwrap();
        for (x, y) in rows {
            writeln!(f, "{x},{y}").unwrap();
        }
        f
    }

    #[test]
    fn heating_round_trip_with_per_ion_rate() {
        let rows: Vec<(f64, f64)> = (0..8).map(|i| (i as f64 * 0.02, 4.4 + 100.0 * i as f64 * 0.02)).collect();
        let f = write_csv(&rows);
        let p = CalibrateParams { n_ions: Some(100), ..Default::default() };
        let r = calibrate(FitKind::Heating, f.path(), &p).unwrap();
        assert!((r.fit.value("rate").unwrap() - 100.0).abs() < 1e-6);
        assert!((r.derived[0].value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn contrast_reports_gamma_el() {
        let rows: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 0.5e-3, (-250.0 * i as f64 * 0.5e-3).exp())).collect();
        let r = calibrate(FitKind::Contrast, write_csv(&rows).path(), &CalibrateParams::default()).unwrap();
        assert!((r.fit.value("gamma_tot").unwrap() - 250.0).abs() < 1e-3);
        assert!((r.derived[0].value - 400.0).abs() < 1e-2);
    }

    #[test]
    fn ringdown_needs_tau() {
        let rows: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 0.1, 0.3)).collect();
        let e = calibrate(FitKind::Ringdown, write_csv(&rows).path(), &CalibrateParams::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn malformed_csv_is_invalid_input() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b\n1,2").unwrap();
        let e = calibrate(FitKind::Contrast, f.path(), &CalibrateParams::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
