//! Protocol and noise descriptions. All rates and couplings are in rad/s.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// rms shot-to-shot detuning, rad/s
    pub sigma: f64,
    pub nbar: f64,
    /// spin decoherence rate while the ODF is on, 1/s
    pub gamma: f64,
    /// multiplies the standard deviation of the read-out noise
    pub excess_noise_factor: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    pub fn new(sigma: f64, nbar: f64, gamma: f64, excess_noise_factor: f64) -> Result<Self> {
        let n = Self { sigma, nbar, gamma, excess_noise_factor };
        n.validate()?;
        Ok(n)
    }

    pub fn ideal() -> Self {
        Self { sigma: 0.0, nbar: 0.0, gamma: 0.0, excess_noise_factor: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return invalid(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return invalid(format!("nbar must be >= 0, got {}", self.nbar));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return invalid(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.excess_noise_factor.is_finite() && self.excess_noise_factor >= 1.0) {
            return invalid(format!(
                "excess_noise_factor must be >= 1, got {}",
                self.excess_noise_factor
            ));
        }
        Ok(())
    }
}

/// Constant ODF coupling `g` and drive `eta` over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub g: f64,
    pub eta: f64,
}

/// Instantaneous displacement e^{β(a† − a)} at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    pub time: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
    pub kicks: Vec<Kick>,
}

impl PulseSchedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn odf_on_time(&self) -> f64 {
        self.segments.iter().filter(|s| s.g != 0.0).map(|s| s.duration).sum()
    }

    /// Total coherent displacement: Σβ + Ση·duration.
    pub fn drive_displacement(&self) -> f64 {
        self.kicks.iter().map(|k| k.beta).sum::<f64>()
            + self.segments.iter().map(|s| s.eta * s.duration).sum::<f64>()
    }

    /// Same schedule with every drive multiplied by `lambda`.
    pub fn scaled_drive(&self, lambda: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment { eta: s.eta * lambda, ..*s })
                .collect(),
            kicks: self.kicks.iter().map(|k| Kick { beta: k.beta * lambda, ..*k }).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            if !(s.duration.is_finite() && s.duration >= 0.0) {
                return invalid(format!("segment duration must be >= 0, got {}", s.duration));
            }
            if !(s.g.is_finite() && s.eta.is_finite()) {
                return invalid("segment coupling and drive must be finite");
            }
        }
        let total = self.total_duration();
        for k in &self.kicks {
            if !(k.time >= 0.0 && k.time <= total * (1.0 + 1e-12)) || !k.beta.is_finite() {
                return invalid(format!("kick at t = {} lies outside [0, {}]", k.time, total));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Protocol {
    /// +g for τ, kick β, −g for τ.
    Displacement { g: f64, tau: f64, beta: f64 },
    /// kick β, then −g for τ: the echo without its first half.
    ReadoutOnly { g: f64, tau: f64, beta: f64 },
    /// constant drive η over T, −g during the final τ.
    ClassicalEField { g: f64, tau: f64, t_total: f64, eta: f64 },
    /// constant drive η over T, +g during the first τ and −g during the last τ.
    QuantumEField { g: f64, tau: f64, t_total: f64, eta: f64 },
    Custom(PulseSchedule),
}

/// The four named protocols without their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolFamily {
    Displacement,
    ReadoutOnly,
    ClassicalEField,
    QuantumEField,
}

impl ProtocolFamily {
    pub fn tag(self) -> &'static str {
        match self {
            ProtocolFamily::Displacement => "displacement",
            ProtocolFamily::ReadoutOnly => "readout",
            ProtocolFamily::ClassicalEField => "classical",
            ProtocolFamily::QuantumEField => "quantum",
        }
    }

    /// Largest admissible τ for a protocol of total length `t_total`.
    pub fn tau_max(self, t_total: f64) -> f64 {
        match self {
            ProtocolFamily::Displacement | ProtocolFamily::QuantumEField => 0.5 * t_total,
            ProtocolFamily::ReadoutOnly | ProtocolFamily::ClassicalEField => t_total,
        }
    }

    /// Protocol with unit drive (β = 1 or η = 1).
    pub fn build(self, g: f64, tau: f64, t_total: f64) -> Protocol {
        match self {
            ProtocolFamily::Displacement => Protocol::Displacement { g, tau, beta: 1.0 },
            ProtocolFamily::ReadoutOnly => Protocol::ReadoutOnly { g, tau, beta: 1.0 },
            ProtocolFamily::ClassicalEField => {
                Protocol::ClassicalEField { g, tau, t_total, eta: 1.0 }
            }
            ProtocolFamily::QuantumEField => Protocol::QuantumEField { g, tau, t_total, eta: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub variant: Protocol,
    pub ion_count: u32,
}

impl ProtocolSpec {
    pub fn new(variant: Protocol, ion_count: u32) -> Result<Self> {
        let s = Self { variant, ion_count };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ion_count < 1 {
            return invalid("ion count must be >= 1");
        }
        let pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                invalid(format!("{name} must be positive, got {v}"))
            }
        };
        let fin = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be finite"))
            }
        };
        match &self.variant {
            Protocol::Displacement { g, tau, beta } | Protocol::ReadoutOnly { g, tau, beta } => {
                pos("tau", *tau)?;
                fin("g", *g)?;
                fin("beta", *beta)
            }
            Protocol::ClassicalEField { g, tau, t_total, eta } => {
                pos("tau", *tau)?;
                fin("g", *g)?;
                fin("eta", *eta)?;
                if !(*tau <= *t_total) {
                    return invalid(format!("classical protocol needs tau <= T ({tau} > {t_total})"));
                }
                Ok(())
            }
            Protocol::QuantumEField { g, tau, t_total, eta } => {
                pos("tau", *tau)?;
                fin("g", *g)?;
                fin("eta", *eta)?;
                if !(2.0 * tau <= *t_total) {
                    return invalid(format!("quantum protocol needs 2 tau <= T ({tau}, {t_total})"));
                }
                Ok(())
            }
            Protocol::Custom(s) => s.validate(),
        }
    }

    pub fn family(&self) -> Option<ProtocolFamily> {
        match self.variant {
            Protocol::Displacement { .. } => Some(ProtocolFamily::Displacement),
            Protocol::ReadoutOnly { .. } => Some(ProtocolFamily::ReadoutOnly),
            Protocol::ClassicalEField { .. } => Some(ProtocolFamily::ClassicalEField),
            Protocol::QuantumEField { .. } => Some(ProtocolFamily::QuantumEField),
            Protocol::Custom(_) => None,
        }
    }

    /// The piecewise-constant schedule the protocol stands for.
    pub fn schedule(&self) -> PulseSchedule {
        let seg = |duration, g, eta| Segment { duration, g, eta };
        match &self.variant {
            Protocol::Displacement { g, tau, beta } => PulseSchedule {
                segments: vec![seg(*tau, *g, 0.0), seg(*tau, -*g, 0.0)],
                kicks: vec![Kick { time: *tau, beta: *beta }],
            },
            Protocol::ReadoutOnly { g, tau, beta } => PulseSchedule {
                segments: vec![seg(*tau, -*g, 0.0)],
                kicks: vec![Kick { time: 0.0, beta: *beta }],
            },
            Protocol::ClassicalEField { g, tau, t_total, eta } => PulseSchedule {
                segments: vec![seg(t_total - tau, 0.0, *eta), seg(*tau, -*g, *eta)],
                kicks: vec![],
            },
            Protocol::QuantumEField { g, tau, t_total, eta } => PulseSchedule {
                segments: vec![
                    seg(*tau, *g, *eta),
                    seg(t_total - 2.0 * tau, 0.0, *eta),
                    seg(*tau, -*g, *eta),
                ],
                kicks: vec![],
            },
            Protocol::Custom(s) => s.clone(),
        }
    }

    /// Copy whose drive amplitude is one: β = 1 or η = 1. Custom schedules are
    /// taken to already define their unit drive.
    pub fn unit_drive(&self) -> Self {
        let variant = match &self.variant {
            Protocol::Displacement { g, tau, .. } => Protocol::Displacement { g: *g, tau: *tau, beta: 1.0 },
            Protocol::ReadoutOnly { g, tau, .. } => Protocol::ReadoutOnly { g: *g, tau: *tau, beta: 1.0 },
            Protocol::ClassicalEField { g, tau, t_total, .. } => {
                Protocol::ClassicalEField { g: *g, tau: *tau, t_total: *t_total, eta: 1.0 }
            }
            Protocol::QuantumEField { g, tau, t_total, .. } => {
                Protocol::QuantumEField { g: *g, tau: *tau, t_total: *t_total, eta: 1.0 }
            }
            Protocol::Custom(s) => Protocol::Custom(s.clone()),
        };
        Self { variant, ion_count: self.ion_count }
    }

    /// Coherent displacement produced by one unit of the estimated parameter.
    pub fn unit_displacement(&self) -> f64 {
        self.unit_drive().schedule().drive_displacement()
    }

    /// Total protocol length.
    pub fn duration(&self) -> f64 {
        match &self.variant {
            Protocol::Displacement { tau, .. } => 2.0 * tau,
            Protocol::ReadoutOnly { tau, .. } => *tau,
            Protocol::ClassicalEField { t_total, .. } | Protocol::QuantumEField { t_total, .. } => *t_total,
            Protocol::Custom(s) => s.total_duration(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_invariants() {
        assert!(NoiseModel::new(0.0, 0.0, 0.0, 1.0).is_ok());
        assert!(NoiseModel::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1, 0.0, 1.0).is_err());
        assert!(NoiseModel::new(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(NoiseModel::new(0.0, 0.0, 0.0, 0.9).is_err());
    }

    #[test]
    fn spec_invariants() {
        let ok = Protocol::QuantumEField { g: 1.0, tau: 0.5, t_total: 1.0, eta: 1.0 };
        assert!(ProtocolSpec::new(ok, 10).is_ok());
        let bad = Protocol::QuantumEField { g: 1.0, tau: 0.6, t_total: 1.0, eta: 1.0 };
        assert!(ProtocolSpec::new(bad, 10).is_err());
        let bad = Protocol::ClassicalEField { g: 1.0, tau: 1.1, t_total: 1.0, eta: 1.0 };
        assert!(ProtocolSpec::new(bad, 10).is_err());
        let bad = Protocol::Displacement { g: 1.0, tau: 0.0, beta: 1.0 };
        assert!(ProtocolSpec::new(bad, 10).is_err());
        let d = Protocol::Displacement { g: 1.0, tau: 1.0, beta: 1.0 };
        assert!(ProtocolSpec::new(d, 0).is_err());
    }

    #[test]
    fn schedule_bookkeeping() {
        let s = ProtocolSpec::new(Protocol::QuantumEField { g: 2.0, tau: 0.1, t_total: 1.0, eta: 3.0 }, 4)
            .unwrap()
            .schedule();
        assert!((s.total_duration() - 1.0).abs() < 1e-15);
        assert!((s.odf_on_time() - 0.2).abs() < 1e-15);
        assert!((s.drive_displacement() - 3.0).abs() < 1e-15);

        let neg = PulseSchedule { segments: vec![Segment { duration: -1.0, g: 0.0, eta: 0.0 }], kicks: vec![] };
        assert!(neg.validate().is_err());
        let late = PulseSchedule {
            segments: vec![Segment { duration: 1.0, g: 0.0, eta: 0.0 }],
            kicks: vec![Kick { time: 2.0, beta: 1.0 }],
        };
        assert!(late.validate().is_err());
    }

    #[test]
    fn unit_displacements() {
        let d = ProtocolSpec::new(Protocol::Displacement { g: 1.0, tau: 1.0, beta: 0.3 }, 2).unwrap();
        assert_eq!(d.unit_displacement(), 1.0);
        let c = ProtocolSpec::new(Protocol::ClassicalEField { g: 1.0, tau: 0.2, t_total: 0.7, eta: 9.0 }, 2)
            .unwrap();
        assert!((c.unit_displacement() - 0.7).abs() < 1e-15);
    }
}
