use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A cosine power was requested outside |x| < pi/2.
    #[error("moment formula outside its domain: |{arg}| >= pi/2")]
    OutsideDomain { arg: f64 },

    #[error("no signal: the averaged slope vanishes")]
    NoSignal,

    #[error("Fock leakage {leak:e} exceeds tolerance {tol:e}")]
    Leakage { leak: f64, tol: f64 },

    #[error("trace drifted by {0:e}")]
    TraceDrift(f64),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("fit did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("bad data: {0}")]
    Data(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::OutsideDomain { .. }
                | Error::NoSignal
                | Error::Leakage { .. }
                | Error::TraceDrift(_)
                | Error::Integration(_)
                | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
