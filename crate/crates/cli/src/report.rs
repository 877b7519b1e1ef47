//! Report and series emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Tolerances;
use crate::CliError;

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// Some oracle call could not decide; values are brackets, not verdicts.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub scenario: String,
    pub toolkit_version: String,
    pub seed: u64,
    /// Effective parameters, defaults included.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub status: Status,
    pub values: Value,
    pub certificates: Value,
    pub series_file: Option<String>,
    pub wall_time_s: f64,
}

impl Report {
    /// JSON with the wall time zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> Result<String, CliError> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        Ok(serde_json::to_string_pretty(&copy)?)
    }
}

/// Rows for `series.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub series: Option<Series>,
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| CliError::from(e.error))?;
    Ok(path)
}

/// Writes `series.csv` (if any) and then `report.json`, each through a
/// temporary file renamed into place.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(series) = &outcome.series {
        written.push(write_atomic(dir, SERIES_FILE, series.to_csv().as_bytes())?);
    }
    let json = serde_json::to_string_pretty(&outcome.report)?;
    written.push(write_atomic(dir, REPORT_FILE, json.as_bytes())?);
    Ok(written)
}
