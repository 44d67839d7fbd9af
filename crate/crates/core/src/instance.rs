//! Job instances and the on-disk job list format.
//!
//! A job list is either UTF-8 text with one positive decimal per line or a
//! JSON array of numbers. The loader picks the format from the first
//! non-whitespace byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The full job list. Only the sampling oracle and post-hoc checks read it
/// directly; the sublinear algorithms see it through draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Instance {
    times: Vec<f64>,
}

impl Instance {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if let Some((index, &value)) = times
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::InvalidProcessingTime { index, value });
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn p_max(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.times.iter().sum()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim_start().as_bytes().first() {
            Some(b'[') => parse_json(text),
            _ => parse_lines(text),
        }
    }

    /// One decimal per line, shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.times.len() * 8);
        for p in &self.times {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Instance {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<Instance> for Vec<f64> {
    fn from(instance: Instance) -> Self {
        instance.times
    }
}

fn parse_lines(text: &str) -> Result<Instance> {
    let mut times = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("`{line}` is not a decimal number"),
        })?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("processing time must be positive and finite, got {value}"),
            });
        }
        times.push(value);
    }
    Instance::new(times)
}

fn parse_json(text: &str) -> Result<Instance> {
    let values: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    Instance::new(values)
}
