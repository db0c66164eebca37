//! Column-oriented output shared by the tabular commands.

use crate::config::{CliError, CliResult, Format};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// resolved inputs, echoed in JSON output
    pub parameters: Value,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>, parameters: Value) -> Self {
        Self { command, columns, rows: Vec::new(), parameters, warnings: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        if let Some((i, j)) = self.first_non_finite() {
            return Err(CliError::Numerical(format!(
                "{} is not finite in row {i}",
                self.columns[j]
            )));
        }
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Io(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for r in &self.rows {
                    w.serialize(r).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), json!(v))).collect::<Map<_, _>>()))
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "parameters": self.parameters,
                    "columns": self.columns,
                    "rows": rows,
                    "warnings": self.warnings,
                });
                to_json_bytes(&doc)
            }
        }
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.iter().position(|v| !v.is_finite()).map(|j| (i, j)))
    }
}

pub fn to_json_bytes<T: serde::Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}
