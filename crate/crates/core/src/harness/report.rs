//! Machine-readable experiment reports, one JSON object per line.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Known,
    Adaptive,
    Deterministic,
}

impl Mode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "known" => Ok(Mode::Known),
            "adaptive" => Ok(Mode::Adaptive),
            "deterministic" => Ok(Mode::Deterministic),
            _ => Err(Error::Config(format!(
                "unknown mode `{name}` (known, adaptive, deterministic)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Known => "known",
            Mode::Adaptive => "adaptive",
            Mode::Deterministic => "deterministic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub m: usize,
    pub epsilon: f64,
    pub gamma0: f64,
    pub seed: u64,
    /// Delta the sketch stage actually ran at.
    pub sketch_delta: f64,
    pub budget_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub exact_opt: f64,
    pub ratio: f64,
    /// Envelope `[lower, upper]` on the ratio.
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub source: String,
    pub params: ReportParams,
    pub n: usize,
    pub estimate: f64,
    pub sketch_entries: usize,
    pub draws_used: u64,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<Validation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded_makespan: Option<f64>,
}

impl ExperimentReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports contain only finite numbers and strings")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Same report with the wall clock zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_ms: 0,
            ..self.clone()
        }
    }
}

/// Writes any serializable records as JSONL.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<ExperimentReport>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            ExperimentReport::from_json_line(l).map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse { line: i + 1, message },
                other => other,
            })
        })
        .collect()
}
