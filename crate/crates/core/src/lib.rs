//! Spin-boson echo metrology with a collective spin coupled to one oscillator mode.
//!
//! Units: angular frequencies and rates in rad/s or 1/s, times in s, β dimensionless.

pub mod calibration;
pub mod entanglement;
pub mod error;
pub mod kernels;
pub mod moments;
pub mod numerics;
pub mod oracle;
pub mod quadrature;
pub mod sensitivity;
pub mod types;
pub mod units;
pub mod wire;

pub use calibration::{CalibrationDataset, FitResult};
pub use error::{Error, Result};
pub use kernels::Kernels;
pub use moments::SpinMoments;
pub use quadrature::QuadratureRule;
pub use sensitivity::SensitivityReport;
pub use types::{Kick, NoiseModel, Protocol, ProtocolFamily, ProtocolSpec, PulseSchedule, Segment};
pub use units::PhysicalConstants;
