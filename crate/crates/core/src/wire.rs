//! JSON wire forms of the input types. Angular frequencies travel as plain Hz
//! in fields suffixed `_hz`; rates (Γ) stay in 1/s.

use crate::error::Result;
use crate::types::{Kick, NoiseModel, Protocol, ProtocolSpec, PulseSchedule, Segment};
use crate::units::{hz_to_rad, rad_to_hz, PhysicalConstants};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstantsWire {
    pub hbar: f64,
    pub ion_mass: f64,
    pub ion_charge: f64,
    pub trap_freq_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModelWire {
    pub sigma_hz: f64,
    pub nbar: f64,
    pub gamma: f64,
    #[serde(default = "one")]
    pub excess_noise_factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentWire {
    pub duration: f64,
    pub g_hz: f64,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolWire {
    Displacement { g_hz: f64, tau: f64, beta: f64 },
    ReadoutOnly { g_hz: f64, tau: f64, beta: f64 },
    ClassicalEField { g_hz: f64, tau: f64, t_total: f64, eta: f64 },
    QuantumEField { g_hz: f64, tau: f64, t_total: f64, eta: f64 },
    Custom { segments: Vec<SegmentWire>, kicks: Vec<Kick> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpecWire {
    pub variant: ProtocolWire,
    pub ion_count: u32,
}

impl From<&PhysicalConstants> for PhysicalConstantsWire {
    fn from(c: &PhysicalConstants) -> Self {
        Self { hbar: c.hbar, ion_mass: c.ion_mass, ion_charge: c.ion_charge, trap_freq_hz: rad_to_hz(c.trap_freq) }
    }
}

impl PhysicalConstantsWire {
    pub fn to_model(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.hbar, self.ion_mass, self.ion_charge, hz_to_rad(self.trap_freq_hz))
    }
}

impl From<&NoiseModel> for NoiseModelWire {
    fn from(n: &NoiseModel) -> Self {
        Self { sigma_hz: rad_to_hz(n.sigma), nbar: n.nbar, gamma: n.gamma, excess_noise_factor: n.excess_noise_factor }
    }
}

impl NoiseModelWire {
    pub fn to_model(&self) -> Result<NoiseModel> {
        NoiseModel::new(hz_to_rad(self.sigma_hz), self.nbar, self.gamma, self.excess_noise_factor)
    }
}

impl From<&ProtocolSpec> for ProtocolSpecWire {
    fn from(s: &ProtocolSpec) -> Self {
        let variant = match &s.variant {
            Protocol::Displacement { g, tau, beta } => ProtocolWire::Displacement { g_hz: rad_to_hz(*g), tau: *tau, beta: *beta },
            Protocol::ReadoutOnly { g, tau, beta } => ProtocolWire::ReadoutOnly { g_hz: rad_to_hz(*g), tau: *tau, beta: *beta },
            Protocol::ClassicalEField { g, tau, t_total, eta } => {
                ProtocolWire::ClassicalEField { g_hz: rad_to_hz(*g), tau: *tau, t_total: *t_total, eta: *eta }
            }
            Protocol::QuantumEField { g, tau, t_total, eta } => {
                ProtocolWire::QuantumEField { g_hz: rad_to_hz(*g), tau: *tau, t_total: *t_total, eta: *eta }
            }
            Protocol::Custom(p) => ProtocolWire::Custom {
                segments: p.segments.iter().map(|s| SegmentWire { duration: s.duration, g_hz: rad_to_hz(s.g), eta: s.eta }).collect(),
                kicks: p.kicks.clone(),
            },
        };
        Self { variant, ion_count: s.ion_count }
    }
}

impl ProtocolSpecWire {
    pub fn to_model(&self) -> Result<ProtocolSpec> {
        let variant = match &self.variant {
            ProtocolWire::Displacement { g_hz, tau, beta } => Protocol::Displacement { g: hz_to_rad(*g_hz), tau: *tau, beta: *beta },
            ProtocolWire::ReadoutOnly { g_hz, tau, beta } => Protocol::ReadoutOnly { g: hz_to_rad(*g_hz), tau: *tau, beta: *beta },
            ProtocolWire::ClassicalEField { g_hz, tau, t_total, eta } => {
                Protocol::ClassicalEField { g: hz_to_rad(*g_hz), tau: *tau, t_total: *t_total, eta: *eta }
            }
            ProtocolWire::QuantumEField { g_hz, tau, t_total, eta } => {
                Protocol::QuantumEField { g: hz_to_rad(*g_hz), tau: *tau, t_total: *t_total, eta: *eta }
            }
            ProtocolWire::Custom { segments, kicks } => Protocol::Custom(PulseSchedule {
                segments: segments.iter().map(|s| Segment { duration: s.duration, g: hz_to_rad(s.g_hz), eta: s.eta }).collect(),
                kicks: kicks.clone(),
            }),
        };
        ProtocolSpec::new(variant, self.ion_count)
    }
}
