//! Flag/file merging. A config file is a flat JSON object holding the output
//! options and the parameters of the command being run; flags win.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ionsense::Error> for CliError {
    fn from(e: ionsense::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Options shared by every command.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub excess_noise: Option<f64>,
}

impl Common {
    pub fn over(self, file: Self) -> Self {
        Self {
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            nodes: self.nodes.or(file.nodes),
            excess_noise: self.excess_noise.or(file.excess_noise),
        }
    }
}

const COMMON_KEYS: [&str; 4] = ["format", "out", "nodes", "excess_noise"];

/// Splits a config file into the shared options and the command parameters.
pub fn load<P: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<(Common, P)> {
    let Some(path) = path else {
        return Ok((Common::default(), P::default()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let Value::Object(mut all) = value else {
        return invalid(format!("{}: config must be a JSON object", path.display()));
    };
    let mut common = Map::new();
    for k in COMMON_KEYS {
        if let Some(v) = all.remove(k) {
            common.insert(k.to_string(), v);
        }
    }
    let bad = |e: serde_json::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let common: Common = serde_json::from_value(Value::Object(common)).map_err(bad)?;
    let params: P = serde_json::from_value(Value::Object(all)).map_err(bad)?;
    Ok((common, params))
}

/// Declares a parameter set usable both as clap flags and as config-file
/// keys. Every field is optional; `over` prefers `self` (the flags).
macro_rules! params {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, serde::Serialize, serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[arg(long, allow_negative_numbers = true)]
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $f: Option<$t>,
            )*
        }

        impl $name {
            pub fn over(self, file: Self) -> Self {
                Self { $($f: self.$f.or(file.$f),)* }
            }
        }
    };
}
pub(crate) use params;

pub fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        invalid(format!("{name} must be positive and finite, got {v}"))
    }
}

pub fn grid_points(name: &str, n: usize) -> CliResult<usize> {
    if n >= 2 {
        Ok(n)
    } else {
        invalid(format!("{name} must be at least 2, got {n}"))
    }
}

/// `n` evenly spaced values from `lo` to `hi`, both ends exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * (i as f64 / (n - 1) as f64) })
        .collect()
}
