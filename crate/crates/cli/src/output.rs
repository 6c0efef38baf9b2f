use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, Settings};
use crate::CliError;

/// Tabular result plus its structured JSON form.
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            json: Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_json(mut self, value: impl Serialize) -> Result<Self, CliError> {
        self.json = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(self)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn config_hash(settings: &Settings) -> String {
    let canonical = serde_json::to_vec(settings).expect("settings serialize");
    let digest = Sha256::digest(&canonical);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn render(command: &str, settings: &Settings, report: &Report) -> Result<Vec<u8>, CliError> {
    let hash = config_hash(settings);
    let seed = settings.seed.unwrap_or(crate::DEFAULT_SEED);
    match settings.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = format!("# fluctlab {command} config_hash={hash} seed={seed}\n").into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&report.columns).map_err(|e| CliError::Io(e.to_string()))?;
                for row in &report.rows {
                    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.flush().map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(buf)
        }
        Format::Json => {
            let doc = json!({
                "command": command,
                "config_hash": hash,
                "seed": seed,
                "config": settings,
                "result": report.json,
            });
            let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
