//! CSV output with an embedded run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Everything needed to rerun a command; written as the first `#` line.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: Vec<String>,
    pub rng: Option<&'static str>,
    pub precision: &'static str,
}

impl RunManifest {
    pub fn new(command: &str, exact: bool) -> Self {
        RunManifest {
            tool: "ggk",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            rng: None,
            precision: if exact { "exact" } else { "float" },
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }
}

/// A finished command: manifest, optional summary, table and exit code.
#[derive(Debug)]
pub struct Report {
    pub manifest: RunManifest,
    pub summary: Option<Value>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(manifest: RunManifest, header: &[&str]) -> Self {
        Report {
            manifest,
            summary: None,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn summary(mut self, value: impl Serialize) -> Self {
        self.summary = serde_json::to_value(value).ok();
        self
    }

    pub fn render(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        writeln!(out, "# {}", serde_json::to_string(&self.manifest)?)?;
        if let Some(summary) = &self.summary {
            writeln!(out, "# summary {}", serde_json::to_string(summary)?)?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Shortest round-trip float formatting, scientific for tiny magnitudes.
pub fn f(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
