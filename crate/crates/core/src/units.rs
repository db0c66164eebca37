//! Physical constants and conversions between protocol quantities and lab units.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Default conversion of electrode voltage to crystal displacement, m/V.
pub const DEFAULT_DISPLACEMENT_PER_VOLT: f64 = 12.9e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// kg
    pub ion_mass: f64,
    /// C
    pub ion_charge: f64,
    /// axial trap frequency, rad/s
    pub trap_freq: f64,
}

impl Default for PhysicalConstants {
    /// ⁹Be⁺ in a 1.59 MHz axial trap.
    fn default() -> Self {
        Self {
            hbar: HBAR,
            ion_mass: 9.012_182 * ATOMIC_MASS_UNIT,
            ion_charge: ELEMENTARY_CHARGE,
            trap_freq: 2.0 * PI * 1.59e6,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, ion_mass: f64, ion_charge: f64, trap_freq: f64) -> Result<Self> {
        let c = Self { hbar, ion_mass, ion_charge, trap_freq };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("ion_mass", self.ion_mass),
            ("ion_charge", self.ion_charge),
            ("trap_freq", self.trap_freq),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}

/// z0 = sqrt(hbar / (2 m ω)).
pub fn ground_state_length(c: &PhysicalConstants) -> f64 {
    (c.hbar / (2.0 * c.ion_mass * c.trap_freq)).sqrt()
}

/// β = Zc √N / (2 z0)
pub fn beta_from_displacement(zc: f64, n_ions: u32, c: &PhysicalConstants) -> f64 {
    zc * (n_ions as f64).sqrt() / (2.0 * ground_state_length(c))
}

pub fn displacement_from_beta(beta: f64, n_ions: u32, c: &PhysicalConstants) -> f64 {
    2.0 * ground_state_length(c) * beta / (n_ions as f64).sqrt()
}

/// Restoring force on the crystal for a static displacement z: F = -m ω² z.
pub fn drive_force(z: f64, c: &PhysicalConstants) -> f64 {
    -c.ion_mass * c.trap_freq * c.trap_freq * z
}

/// Coherent displacement amplitude produced by a resonant force F applied for time T.
pub fn displacement_from_force(force: f64, t_total: f64, c: &PhysicalConstants) -> f64 {
    force * t_total / (2.0 * c.ion_mass * c.trap_freq)
}

/// Converts a drive-strength uncertainty Δη (rad/s) into a field uncertainty Δε (V/m).
///
/// With β = ηT, β = Zc √N/(2 z0) and Zc = qεT/(2 m ω), the protocol time
/// cancels: Δε = 4 m ω z0 Δη / (q √N). `t_total` is only validated.
pub fn efield_sensitivity_from_eta(
    delta_eta: f64,
    t_total: f64,
    c: &PhysicalConstants,
    n_ions: u32,
) -> Result<f64> {
    if !(t_total > 0.0) {
        return invalid(format!("protocol time must be positive, got {t_total}"));
    }
    if n_ions == 0 {
        return invalid("ion count must be positive");
    }
    let z0 = ground_state_length(c);
    Ok(4.0 * c.ion_mass * c.trap_freq * z0 * delta_eta / (c.ion_charge * (n_ions as f64).sqrt()))
}

/// Field sensitivity per √Hz for a repetition time `t_shot`.
pub fn per_root_hz(delta_eps: f64, t_shot: f64) -> f64 {
    delta_eps * t_shot.sqrt()
}

pub fn voltage_to_displacement(volts: f64, metres_per_volt: f64) -> Result<f64> {
    if !(metres_per_volt > 0.0) {
        return invalid("calibration constant must be positive");
    }
    Ok(volts * metres_per_volt)
}

/// 10 log10(reference / achieved); positive means better than the reference.
pub fn db_below(reference: f64, achieved: f64) -> f64 {
    10.0 * (reference / achieved).log10()
}

pub fn hz_to_rad(hz: f64) -> f64 {
    2.0 * PI * hz
}

pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
