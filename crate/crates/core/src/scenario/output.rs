//! Result emission: CSV tables and JSON sidecars.
//!
//! CSV values use Rust's shortest round-trip float formatting (`.` decimal,
//! no locale), so identical scans produce bit-identical files. The sidecar
//! echoes the fully resolved configuration; feeding it back to `load_config`
//! reproduces the identical scan.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transduction::ScanResult;

use super::config::{RawConfig, ScenarioConfig};
use super::runner::{ScanAbort, ScanOutcome};

/// Library version stamped into every sidecar.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document written next to each result table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub version: String,
    pub wall_time_s: f64,
    /// Rows actually produced (equals the configured point count unless the
    /// scan aborted).
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<ScanAbort>,
    /// Data file the sidecar describes (CSV format only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_file: Option<String>,
    /// Fully resolved configuration, reloadable through `load_config`.
    pub config: RawConfig,
    /// The result table itself (JSON format only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ScanResult>,
}

/// Render a scan table as CSV. An aborted scan keeps its completed rows and
/// ends with a marker comment naming the failed point.
pub fn csv_string(result: &ScanResult, abort: Option<&ScanAbort>) -> String {
    let mut out = String::new();
    out.push_str(&result.axis_label);
    for column in &result.columns {
        out.push(',');
        out.push_str(column);
    }
    out.push('\n');
    for row in &result.rows {
        let _ = write!(out, "{}", row.axis);
        for value in &row.values {
            let _ = write!(out, ",{value}");
        }
        out.push('\n');
    }
    if let Some(abort) = abort {
        let _ = writeln!(out, "# aborted: {}", abort.message);
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::config("output", format!("cannot write {}: {e}", path.display())))
}

/// Output format for `write_outputs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// `<stem>.csv` data table plus `<stem>.json` sidecar.
    Csv,
    /// Single `<stem>.json` with the sidecar and the embedded result table.
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config("format", format!("unknown format '{other}'; expected csv or json"))),
        }
    }
}

/// Files produced by `write_outputs`.
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub data: PathBuf,
    pub sidecar: PathBuf,
}

/// Write a finished scan to `dir/<stem>.*` in the requested format and return
/// the paths written. The sidecar always embeds the resolved configuration.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    cfg: &ScenarioConfig,
    outcome: &ScanOutcome,
    format: OutputFormat,
) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::config("out", format!("cannot create {}: {e}", dir.display())))?;
    let sidecar_path = dir.join(format!("{stem}.json"));
    let mut sidecar = Sidecar {
        name: cfg.name.clone(),
        version: VERSION.to_string(),
        wall_time_s: outcome.wall_seconds,
        points: outcome.result.rows.len(),
        aborted: outcome.abort.clone(),
        data_file: None,
        config: cfg.to_raw(),
        result: None,
    };
    let data_path = match format {
        OutputFormat::Csv => {
            let csv_path = dir.join(format!("{stem}.csv"));
            write_file(&csv_path, &csv_string(&outcome.result, outcome.abort.as_ref()))?;
            sidecar.data_file = Some(format!("{stem}.csv"));
            csv_path
        }
        OutputFormat::Json => {
            sidecar.result = Some(outcome.result.clone());
            sidecar_path.clone()
        }
    };
    let body = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::config("output", format!("cannot serialize sidecar: {e}")))?;
    write_file(&sidecar_path, &body)?;
    Ok(WrittenFiles { data: data_path, sidecar: sidecar_path })
}
