//! Result files: a CSV body plus a JSON sidecar, or a single JSON document.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, Format, GlobalArgs};
use crate::error::CliError;

/// Bumped whenever a column or sidecar field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Debug, Clone)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub tol: f64,
    pub jobs: Option<usize>,
    pub format: Format,
    pub outputs: Outputs,
}

#[derive(Serialize, Debug, Clone)]
pub struct Outputs {
    pub rows: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command, global: &GlobalArgs) -> Self {
        let sidecar = match (global.format, &global.out) {
            (Format::Csv, Some(out)) => Some(sidecar_path(out)),
            _ => None,
        };
        Self {
            command,
            seed: global.seed,
            tol: global.tol,
            jobs: global.jobs,
            format: global.format,
            outputs: Outputs {
                rows: global.out.clone(),
                sidecar,
            },
        }
    }
}

/// `results.csv` -> `results.json`; a `.json` result file gets `.sidecar.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("sidecar.json")
    } else {
        out.with_extension("json")
    }
}

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Some points failed; they are recorded in the rows.
    Partial,
}

pub struct Outcome<R> {
    pub rows: Vec<R>,
    pub summary: Value,
    pub status: Status,
}

pub fn csv_body<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn record<R: Serialize>(config: &ExperimentConfig, outcome: &Outcome<R>, wall: Duration) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "library_version": env!("CARGO_PKG_VERSION"),
        "status": outcome.status,
        "wall_time_s": wall.as_secs_f64(),
        "config": config,
        "row_count": outcome.rows.len(),
        "summary": outcome.summary,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

/// Writes the run in the configured format.
pub fn emit<R: Serialize>(config: &ExperimentConfig, outcome: &Outcome<R>, wall: Duration) -> Result<(), CliError> {
    let mut rec = record(config, outcome, wall);
    match config.format {
        Format::Csv => {
            let body = csv_body(&outcome.rows)?;
            match (&config.outputs.rows, &config.outputs.sidecar) {
                (Some(out), Some(side)) => {
                    write_file(out, &body)?;
                    write_file(side, &pretty(&rec)?)
                }
                _ => Ok(std::io::stdout().lock().write_all(&body)?),
            }
        }
        Format::Json => {
            rec["rows"] = serde_json::to_value(&outcome.rows).map_err(|e| CliError::Io(e.to_string()))?;
            let bytes = pretty(&rec)?;
            match &config.outputs.rows {
                Some(out) => write_file(out, &bytes),
                None => Ok(std::io::stdout().lock().write_all(&bytes)?),
            }
        }
    }
}

/// Joins per-cut values as `a;b;c` so they fit one CSV field.
pub fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        k: usize,
        d: Option<f64>,
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("a/r.csv")), Path::new("a/r.json"));
        assert_eq!(sidecar_path(Path::new("r")), Path::new("r.json"));
        assert_eq!(sidecar_path(Path::new("r.json")), Path::new("r.sidecar.json"));
    }

    #[test]
    fn csv_has_header_and_empty_missing_values() {
        let body = csv_body(&[Row { k: 1, d: Some(0.5) }, Row { k: 2, d: None }]).unwrap();
        assert_eq!(String::from_utf8(body).unwrap(), "k,d\n1,0.5\n2,\n");
        assert_eq!(join(&[3, 3, 1]), "3;3;1");
    }
}
