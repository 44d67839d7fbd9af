//! Synthetic instance families.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Uniform on `[lo, hi]`, default `[1, 10]`.
    Uniform,
    /// `round(frac n)` jobs of size `high`, the rest `low`; defaults 0.5, 100, 1.
    TwoPoint,
    /// `exp` of a uniform on `[ln lo, ln hi]`, default `[1, 1e4]`.
    LogUniform,
    /// One job of size `giant` and `n-1` jobs sharing `small_mass` in total;
    /// defaults 1 and 1e-3.
    OneGiant,
    /// `top ratio^X` with `X` the number of failures before the first
    /// success at probability `p`, capped at 60; defaults 1e3, 0.5, 0.5.
    Geometric,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Uniform,
        Family::TwoPoint,
        Family::LogUniform,
        Family::OneGiant,
        Family::Geometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::TwoPoint => "two_point",
            Family::LogUniform => "log_uniform",
            Family::OneGiant => "one_giant",
            Family::Geometric => "geometric",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown instance family `{name}`")))
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Family::Uniform | Family::LogUniform => &["lo", "hi"],
            Family::TwoPoint => &["high", "low", "frac"],
            Family::OneGiant => &["giant", "small_mass"],
            Family::Geometric => &["top", "ratio", "p"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            seed,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<Self> {
        if !self.family.keys().contains(&key) {
            return Err(Error::Config(format!(
                "family {} has no parameter `{key}` (known: {})",
                self.family,
                self.family.keys().join(", ")
            )));
        }
        self.params.insert(key.to_owned(), value);
        Ok(self)
    }

    /// Parses `family:n=INT[,seed=INT][,key=FLOAT...]`. `seed` defaults to
    /// `default_seed`.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let family = Family::parse(name.trim())?;
        let mut n = None;
        let mut seed = default_seed;
        let mut pairs = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{item}`")))?;
            let bad = || Error::Config(format!("bad value for `{key}`: `{value}`"));
            match key.trim() {
                "n" => n = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "seed" => seed = value.trim().parse().map_err(|_| bad())?,
                k => pairs.push((k.to_owned(), value.trim().parse::<f64>().map_err(|_| bad())?)),
            }
        }
        let n = n.ok_or_else(|| Error::Config(format!("generator spec `{text}` lacks n=")))?;
        let mut spec = Self::new(family, n, seed);
        for (k, v) in pairs {
            spec = spec.with(&k, v)?;
        }
        Ok(spec)
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn generate(&self) -> Result<Instance> {
        if self.n == 0 {
            return Err(Error::EmptyInstance);
        }
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let times = match self.family {
            Family::Uniform => {
                let (lo, hi) = (self.get("lo", 1.0), self.get("hi", 10.0));
                range_check(lo, hi)?;
                (0..n).map(|_| rng.random_range(lo..=hi)).collect()
            }
            Family::LogUniform => {
                let (lo, hi) = (self.get("lo", 1.0), self.get("hi", 1e4));
                range_check(lo, hi)?;
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|_| rng.random_range(a..=b).exp().clamp(lo, hi)).collect()
            }
            Family::TwoPoint => {
                let (high, low, frac) = (self.get("high", 100.0), self.get("low", 1.0), self.get("frac", 0.5));
                if !(0.0..=1.0).contains(&frac) {
                    return Err(Error::Config(format!("frac must lie in [0, 1], got {frac}")));
                }
                let k = (frac * n as f64).round() as usize;
                let mut v: Vec<f64> = (0..n).map(|i| if i < k { high } else { low }).collect();
                v.shuffle(&mut rng);
                v
            }
            Family::OneGiant => {
                let giant = self.get("giant", 1.0);
                let mass = self.get("small_mass", 1e-3);
                let small = if n > 1 { mass / (n - 1) as f64 } else { giant };
                let mut v = vec![small; n];
                v[rng.random_range(0..n)] = giant;
                v
            }
            Family::Geometric => {
                let (top, ratio, p) = (self.get("top", 1e3), self.get("ratio", 0.5), self.get("p", 0.5));
                if !(ratio > 0.0 && ratio < 1.0 && p > 0.0 && p <= 1.0) {
                    return Err(Error::Config("geometric needs ratio in (0,1) and p in (0,1]".into()));
                }
                (0..n)
                    .map(|_| {
                        let mut x = 0;
                        while x < 60 && !rng.random_bool(p) {
                            x += 1;
                        }
                        top * ratio.powi(x)
                    })
                    .collect()
            }
        };
        Instance::new(times)
    }
}

fn range_check(lo: f64, hi: f64) -> Result<()> {
    if lo > 0.0 && lo <= hi && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("need 0 < lo <= hi, got lo={lo} hi={hi}")))
    }
}

/// Groups equal processing times into `(time, count)` pairs, largest first.
pub fn job_types(times: &[f64]) -> Vec<(f64, u64)> {
    let mut map = BTreeMap::new();
    for &p in times {
        *map.entry(p.to_bits()).or_insert(0u64) += 1;
    }
    let mut v: Vec<(f64, u64)> = map.into_iter().map(|(b, c)| (f64::from_bits(b), c)).collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v
}
