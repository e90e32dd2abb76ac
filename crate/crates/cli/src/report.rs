use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "v1";

/// Common wrapper of every JSON report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub tol: f64,
    pub inputs_hash: String,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, seed: u64, tol: f64, inputs_hash: String, result: T) -> Self {
        Envelope {
            schema: format!("sdrdu/{command}-report/{SCHEMA_VERSION}"),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            tol,
            inputs_hash,
            result,
        }
    }
}

/// One CSV line: `case_id, inputs_hash, result, gap, seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub case_id: String,
    pub inputs_hash: String,
    pub result: String,
    pub gap: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn render_json<T: Serialize>(report: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("reports serialize");
    out.push(b'\n');
    out
}

/// RFC 4180 CSV with a header line, even when `rows` is empty.
pub fn render_csv(rows: &[Row]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["case_id", "inputs_hash", "result", "gap", "seed"])
        .map_err(csv_err)?;
    for r in rows {
        let gap = r.gap.map(|g| g.to_string()).unwrap_or_default();
        w.write_record([
            r.case_id.as_str(),
            r.inputs_hash.as_str(),
            r.result.as_str(),
            gap.as_str(),
            r.seed.to_string().as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

/// Writes to `path`, or to standard output without one.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|source| CliError::Write {
                path: p.display().to_string(),
                source,
            })?;
            f.write_all(bytes).map_err(|source| CliError::Write {
                path: p.display().to_string(),
                source,
            })
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
