use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Read;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yerr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDataset {
    pub points: Vec<DataPoint>,
}

impl CalibrationDataset {
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Data(format!("need at least 3 points, got {}", points.len())));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Data(format!("row {}: non-finite value", i + 1)));
            }
            if let Some(e) = p.yerr {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(Error::Data(format!("row {}: yerr must be positive", i + 1)));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn from_xy(x: &[f64], y: &[f64], yerr: Option<f64>) -> Result<Self> {
        Self::new(x.iter().zip(y).map(|(&x, &y)| DataPoint { x, y, yerr }).collect())
    }

    /// CSV with header `x,y,yerr`; the yerr column may be absent or empty.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < 2 || names[0] != "x" || names[1] != "y" || (names.len() > 2 && names[2] != "yerr") || names.len() > 3 {
            return Err(Error::Data(format!("expected header x,y[,yerr], got {}", names.join(","))));
        }
        let mut points = Vec::new();
        for row in rd.deserialize::<DataPoint>() {
            points.push(row.map_err(|e| Error::Data(e.to_string()))?);
        }
        Self::new(points)
    }

    pub fn has_errors(&self) -> bool {
        self.points.iter().all(|p| p.yerr.is_some())
    }
}
