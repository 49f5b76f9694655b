//! Machine-readable run reports and CSV output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A reported quantity: a finite number or a symbolic outcome such as
/// `"unbounded"` or `"never"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Value,
    pub unit: String,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub tool: &'static str,
    pub version: &'static str,
    /// Arguments after the program name; rerunning them reproduces the report.
    pub command: Vec<String>,
    /// `sha256:` digest of the canonical instance JSON, when an instance was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub values: Vec<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl BoundReport {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: "nisqbound",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_digest: None,
            values: Vec::new(),
            data: None,
        }
    }

    pub fn number(&mut self, name: &str, value: f64, unit: &str, provenance: &str) -> CliResult<()> {
        if !value.is_finite() {
            return Err(CliError::Rejected(format!("{name} is not finite ({value})")));
        }
        self.push(name, Value::Number(value), unit, provenance);
        Ok(())
    }

    pub fn text(&mut self, name: &str, value: &str, unit: &str, provenance: &str) {
        self.push(name, Value::Text(value.to_string()), unit, provenance);
    }

    fn push(&mut self, name: &str, value: Value, unit: &str, provenance: &str) {
        self.values.push(Quantity {
            name: name.to_string(),
            value,
            unit: unit.to_string(),
            provenance: provenance.to_string(),
        });
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn digest(canonical_json: &str) -> String {
    let hash = Sha256::digest(canonical_json.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Renders rows as CSV, rejecting non-finite numbers.
pub fn csv_text(header: &[&str], rows: &[Vec<CsvCell>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::Rejected("CSV row width does not match header".into()));
        }
        let mut record = Vec::with_capacity(row.len());
        for cell in row {
            record.push(match cell {
                CsvCell::Num(x) if !x.is_finite() => {
                    return Err(CliError::Rejected(format!("refusing to write non-finite value {x} to CSV")));
                }
                CsvCell::Num(x) => format!("{x}"),
                CsvCell::Int(i) => i.to_string(),
                CsvCell::Str(s) => s.clone(),
            });
        }
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Rejected(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Rejected(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsvCell {
    Num(f64),
    Int(i64),
    Str(String),
}
