//! Single-round sketch construction when the job count `n` is known.
//!
//! A few draws bound `p_max` from above; one batch of `K` draws then decides
//! which intervals survive. Intervals containing a frequently drawn job
//! (`H1`) are counted directly; the others (`H2`) go through the birthday
//! estimator.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::birthday::{birthday_estimate, BirthdayEstimate};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::interval::IntervalScheme;
use crate::params::GAMMA0_MAX;
use crate::sampler::{Sample, WeightedSampler};
use crate::scheduler::deterministic::deterministic_sketch_at;
use crate::sketch::{SketchEntry, SketchInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownNConfig {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub gamma0: f64,
    /// Multiplies the main sample budget `K` and everything derived from it.
    pub budget_scale: f64,
    /// Refuse to run when the planned number of draws exceeds this.
    pub max_draws: Option<u64>,
}

impl KnownNConfig {
    pub fn new(n: usize, m: usize, delta: f64, gamma0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        if m == 0 {
            return Err(Error::Config("machine count must be at least 1".into()));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Config(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        if !(gamma0 > 0.0 && gamma0 <= GAMMA0_MAX) {
            return Err(Error::Config(format!("gamma0 must lie in (0, 1/12], got {gamma0}")));
        }
        Ok(Self {
            n,
            m,
            delta,
            gamma0,
            budget_scale: 1.0,
            max_draws: None,
        })
    }

    pub fn with_budget_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("budget scale must be positive, got {scale}")));
        }
        self.budget_scale = scale;
        Ok(self)
    }

    pub fn with_max_draws(mut self, limit: u64) -> Self {
        self.max_draws = Some(limit);
        self
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Draws spent bounding `p_max`: `ceil(log2(1/gamma0))`.
    pub fn k0(&self) -> u64 {
        (1.0 / self.gamma0).log2().ceil().max(1.0) as u64
    }

    /// Interval horizon `(1/delta) ln(n^2/delta)`.
    pub fn h(&self) -> f64 {
        (self.nf() * self.nf() / self.delta).ln() / self.delta
    }

    /// Largest interval index kept.
    pub fn h_max(&self) -> usize {
        self.h().floor() as usize
    }

    pub fn tau(&self) -> f64 {
        let h = self.h();
        let grid = (3.0 * self.nf().sqrt()).ln() / self.delta.ln_1p();
        self.delta * h * (16.0 * h * grid / self.gamma0).ln()
    }

    /// Unscaled main budget `(36 m / delta^4) sqrt(n) tau`.
    pub fn nominal_k(&self) -> f64 {
        36.0 * self.m as f64 / self.delta.powi(4) * self.nf().sqrt() * self.tau()
    }

    /// Main budget after scaling, at least one draw.
    pub fn k(&self) -> u64 {
        (self.budget_scale * self.nominal_k()).ceil().max(1.0) as u64
    }

    /// Per-job frequency marking an `H1` interval: `36 ln(2n/gamma0)`.
    pub fn f_n(&self) -> f64 {
        36.0 * (2.0 * self.nf() / self.gamma0).ln()
    }

    /// Samples an interval needs to be kept: `delta K / (m h)`.
    pub fn interval_min_samples(&self) -> f64 {
        self.delta * self.k() as f64 / (self.m as f64 * self.h())
    }

    /// Birthday group size `3 sqrt(n)`.
    pub fn h0(&self) -> f64 {
        3.0 * self.nf().sqrt()
    }

    /// The collision analysis needs `n >= 1/delta^2`; below that the
    /// deterministic sketch is used.
    pub fn uses_fallback(&self) -> bool {
        self.nf() < 1.0 / (self.delta * self.delta)
    }

    pub fn planned_draws(&self) -> u64 {
        if self.uses_fallback() {
            0
        } else {
            self.k0() + self.k()
        }
    }
}

/// Per-interval and per-job sample counts with per-interval draw logs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleTally {
    logs: BTreeMap<usize, Vec<usize>>,
    jobs: HashMap<usize, u64>,
    total: u64,
    outside: u64,
}

impl SampleTally {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one draw. Draws above the scheme's anchor count towards the
    /// total but belong to no interval.
    pub fn record(&mut self, scheme: &IntervalScheme, sample: Sample) {
        self.total += 1;
        *self.jobs.entry(sample.job).or_default() += 1;
        match scheme.locate(sample.time) {
            Some(k) => self.logs.entry(k).or_default().push(sample.job),
            None => self.outside += 1,
        }
    }

    pub fn from_samples(scheme: &IntervalScheme, samples: &[Sample]) -> Self {
        let mut t = Self::new();
        for &s in samples {
            t.record(scheme, s);
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Draws that fell above the anchor.
    pub fn outside(&self) -> u64 {
        self.outside
    }

    /// `X_k`.
    pub fn interval_count(&self, k: usize) -> u64 {
        self.logs.get(&k).map_or(0, |l| l.len() as u64)
    }

    /// `x_j`.
    pub fn job_count(&self, job: usize) -> u64 {
        self.jobs.get(&job).copied().unwrap_or(0)
    }

    /// Jobs drawn in interval `k`, in draw order.
    pub fn log(&self, k: usize) -> &[usize] {
        self.logs.get(&k).map_or(&[], |l| l.as_slice())
    }

    /// Intervals with at least one draw, ascending.
    pub fn intervals(&self) -> impl Iterator<Item = usize> + '_ {
        self.logs.keys().copied()
    }

    /// `(k, X_k)` pairs, ascending in `k`.
    pub fn interval_counts(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.logs.iter().map(|(&k, l)| (k, l.len() as u64))
    }
}

/// Splits the well-sampled intervals (`k <= h_max`, `X_k >= min_samples`)
/// into those with a job drawn at least `heavy` times and the rest.
pub fn classify_intervals(
    tally: &SampleTally,
    h_max: usize,
    min_samples: f64,
    heavy: f64,
) -> (Vec<usize>, Vec<usize>) {
    let (mut h1, mut h2) = (Vec::new(), Vec::new());
    for (k, x) in tally.interval_counts() {
        if k > h_max || (x as f64) < min_samples {
            continue;
        }
        if tally.log(k).iter().any(|&j| tally.job_count(j) as f64 >= heavy) {
            h1.push(k);
        } else {
            h2.push(k);
        }
    }
    (h1, h2)
}

/// Distinct jobs drawn in interval `k`.
pub fn count_h1(tally: &SampleTally, k: usize) -> u64 {
    tally.log(k).iter().collect::<HashSet<_>>().len() as u64
}

/// `2 n` times the largest of `k0` draws.
pub fn estimate_pmax_upper(sampler: &mut impl WeightedSampler, config: &KnownNConfig) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..config.k0() {
        best = best.max(sampler.sample_one().time);
    }
    2.0 * config.nf() * best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownRun {
    pub sketch: SketchInstance,
    pub fallback: bool,
    pub draws: u64,
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    /// `H2` intervals without a single full birthday group.
    pub dropped: Vec<usize>,
    pub estimates: Vec<(usize, BirthdayEstimate)>,
}

/// Builds the sketch. Falls back to the deterministic sketch (a full scan,
/// zero draws) when `n < 1/delta^2`.
pub fn sketch_known_n(
    sampler: &mut impl WeightedSampler,
    config: &KnownNConfig,
) -> Result<KnownRun> {
    if config.uses_fallback() {
        let instance = Instance::new(sampler.scan())?;
        let sketch = deterministic_sketch_at(&instance, config.delta)?;
        return Ok(KnownRun {
            sketch,
            fallback: true,
            draws: 0,
            h1: Vec::new(),
            h2: Vec::new(),
            dropped: Vec::new(),
            estimates: Vec::new(),
        });
    }
    let planned = config.planned_draws();
    if let Some(limit) = config.max_draws {
        if planned > limit {
            return Err(Error::BudgetExceeded { planned, limit });
        }
    }
    let start = sampler.draws_used();

    let anchor = estimate_pmax_upper(sampler, config);
    let scheme = IntervalScheme::new(anchor, config.delta)?;

    let mut tally = SampleTally::new();
    for _ in 0..config.k() {
        let s = sampler.sample_one();
        tally.record(&scheme, s);
    }
    log::debug!(
        "known-n: anchor {anchor}, K = {}, {} intervals sampled",
        config.k(),
        tally.logs.len()
    );

    let (h1, h2) = classify_intervals(
        &tally,
        config.h_max(),
        config.interval_min_samples(),
        config.f_n(),
    );
    let mut entries = Vec::with_capacity(h1.len() + h2.len());
    for &k in &h1 {
        entries.push(SketchEntry {
            interval: k,
            count: count_h1(&tally, k),
            time: scheme.upper(k),
            saturated: false,
        });
    }
    let mut dropped = Vec::new();
    let mut estimates = Vec::new();
    for &k in &h2 {
        match birthday_estimate(tally.log(k), config.delta, config.h0()) {
            Ok(est) => {
                entries.push(SketchEntry {
                    interval: k,
                    count: est.count,
                    time: scheme.upper(k),
                    saturated: est.saturated,
                });
                estimates.push((k, est));
            }
            Err(Error::InsufficientSamples { got, needed }) => {
                log::warn!("interval {k}: {got} samples, a birthday group needs {needed}; dropped");
                dropped.push(k);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(KnownRun {
        sketch: SketchInstance::new(scheme, entries)?,
        fallback: false,
        draws: sampler.draws_used() - start,
        h1,
        h2,
        dropped,
        estimates,
    })
}
