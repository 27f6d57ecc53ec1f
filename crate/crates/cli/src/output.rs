//! Report assembly and emission.
//!
//! CSV output is a fixed header plus one row per record, ready for plotting.
//! JSON output wraps the same records with a versioned schema tag and the
//! parameters that produced them.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub struct Report {
    /// Short table name; the JSON schema tag is `quadmoments.<name>/v1`.
    pub name: &'static str,
    pub default_format: Format,
    pub params: Value,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub records: Vec<Value>,
}

impl Report {
    pub fn new(name: &'static str, default_format: Format, params: Value, headers: &[&'static str]) -> Self {
        Report {
            name,
            default_format,
            params,
            headers: headers.to_vec(),
            rows: Vec::new(),
            records: Vec::new(),
        }
    }

    /// Adds one CSV row and its JSON record.
    pub fn push<T: Serialize>(&mut self, row: Vec<String>, record: &T) -> Result<(), CliError> {
        self.push_row(row);
        self.push_record(record)
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn push_record<T: Serialize>(&mut self, record: &T) -> Result<(), CliError> {
        self.records.push(serde_json::to_value(record).map_err(CliError::internal)?);
        Ok(())
    }

    pub fn schema(&self) -> String {
        format!("quadmoments.{}/v1", self.name)
    }

    pub fn write(&self, format: Option<Format>, out: &mut dyn Write) -> Result<(), CliError> {
        match format.unwrap_or(self.default_format) {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.headers).map_err(CliError::internal)?;
                for row in &self.rows {
                    w.write_record(row).map_err(CliError::internal)?;
                }
                w.flush()?;
            }
            Format::Json => {
                // key order is preserved, so the schema tag comes first
                let doc = json!({
                    "schema": self.schema(),
                    "generator": {
                        "name": "quadmoments",
                        "version": env!("CARGO_PKG_VERSION"),
                        "library_version": quadmoments::VERSION,
                    },
                    "params": self.params,
                    "records": self.records,
                });
                serde_json::to_writer_pretty(&mut *out, &doc).map_err(CliError::internal)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn fnum(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Absent values become empty cells.
pub fn opt(v: Option<f64>) -> String {
    v.map(fnum).unwrap_or_default()
}
