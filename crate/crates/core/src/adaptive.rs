//! Sketch construction when the job count is unknown.
//!
//! A short first batch fixes the weight scale `w0` and the interval horizon
//! `h`. A classification batch of `K0` draws splits the surviving intervals
//! into directly counted ones and birthday ones, and the birthday intervals
//! are then resolved by rounds of `2^j K0` fresh draws until each is marked.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::birthday::{count_from_grid, prefix_len, GroupProfile};
use crate::error::{Error, Result};
use crate::interval::IntervalScheme;
use crate::known::{classify_intervals, count_h1, SampleTally};
use crate::params::GAMMA0_MAX;
use crate::sampler::WeightedSampler;
use crate::sketch::{SketchEntry, SketchInstance};

/// Rounds stop doubling past `2^MAX_ROUND K0` draws.
const MAX_ROUND: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub m: usize,
    pub delta: f64,
    pub gamma0: f64,
    /// Multiplies `K0`, the classification budget and the first round size.
    pub budget_scale: f64,
    /// Refuse to start a batch that would push the total past this.
    pub max_draws: Option<u64>,
}

impl AdaptiveConfig {
    pub fn new(m: usize, delta: f64, gamma0: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("machine count must be at least 1".into()));
        }
        if !(delta > 0.0 && delta <= 1.0 / 3.0 + 1e-12) {
            return Err(Error::Config(format!("delta must lie in (0, 1/3], got {delta}")));
        }
        if !(gamma0 > 0.0 && gamma0 <= GAMMA0_MAX) {
            return Err(Error::Config(format!("gamma0 must lie in (0, 1/12], got {gamma0}")));
        }
        Ok(Self {
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

    fn md(&self) -> f64 {
        self.m as f64 / self.delta
    }

    /// Smallest integer `d0` with `(1 - delta/m)^((m/delta) d0) <= gamma0`.
    pub fn d0(&self) -> u64 {
        let per = self.md() * (-self.delta / self.m as f64).ln_1p();
        let holds = |d: u64| per * d as f64 <= self.gamma0.ln();
        let mut d = (self.gamma0.ln() / per).ceil().max(1.0) as u64;
        while !holds(d) {
            d += 1;
        }
        while d > 1 && holds(d - 1) {
            d -= 1;
        }
        d
    }

    /// First batch size `(m/delta) d0`, rounded up.
    pub fn k_init(&self) -> u64 {
        (self.md() * self.d0() as f64 - 1e-9).ceil() as u64
    }

    /// `delta^3 / (32 m h)`.
    pub fn beta0(&self, h: usize) -> f64 {
        self.delta.powi(3) / (32.0 * self.m as f64 * h as f64)
    }

    /// Unscaled `(8/beta0) ln(e / (beta0 gamma0))`.
    pub fn nominal_k0(&self, h: usize) -> f64 {
        let b = self.beta0(h);
        8.0 / b * (std::f64::consts::E / (b * self.gamma0)).ln()
    }

    pub fn k0(&self, h: usize) -> u64 {
        (self.budget_scale * self.nominal_k0(h)).ceil().max(1.0) as u64
    }

    /// Per-job count marking a directly counted interval, `8 beta0 K0` at the
    /// unscaled `K0`. It stays an absolute count so that a scaled budget
    /// still sees every job of such an interval.
    pub fn h1_threshold(&self, h: usize) -> f64 {
        8.0 * self.beta0(h) * self.nominal_k0(h)
    }

    /// Samples an interval needs in the classification batch: `delta K0 / (m h)`.
    pub fn interval_min(&self, h: usize) -> f64 {
        self.delta * self.k0(h) as f64 / (self.m as f64 * h as f64)
    }

    /// Grid point `l_t = (1+delta)^t`.
    pub fn grid(&self, t: usize) -> f64 {
        (1.0 + self.delta).powi(t as i32)
    }

    /// Group count `u_t = ceil(3e/delta^2 ln(1/gamma_t))` with
    /// `gamma_t = delta gamma0 / (h l_t)`.
    pub fn groups(&self, h: usize, t: usize) -> usize {
        let gamma_t = self.delta * self.gamma0 / (h as f64 * self.grid(t));
        (3.0 * std::f64::consts::E / (self.delta * self.delta) * (1.0 / gamma_t).ln()).ceil() as usize
    }

    /// Samples needed to test grid point `t`: `ceil(l_t) u_t`.
    pub fn samples_needed(&self, h: usize, t: usize) -> usize {
        prefix_len(self.grid(t)) * self.groups(h, t)
    }

    /// Largest `t >= 1` whose test fits in `available` samples.
    pub fn largest_grid_point(&self, h: usize, available: usize) -> Option<usize> {
        let mut t = 0;
        while available >= self.samples_needed(h, t + 1) {
            t += 1;
        }
        (t >= 1).then_some(t)
    }
}

/// Largest of `K_init` draws.
pub fn estimate_w0(sampler: &mut impl WeightedSampler, config: &AdaptiveConfig) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..config.k_init() {
        best = best.max(sampler.sample_one().time);
    }
    best
}

/// Smallest `h >= 1` with `sum_{k > h} X_k <= d0 / 4`.
pub fn determine_h(tally: &SampleTally, config: &AdaptiveConfig) -> usize {
    let limit = config.d0() as f64 / 4.0;
    let mut beyond: u64 = tally.interval_counts().filter(|&(k, _)| k > 1).map(|(_, x)| x).sum();
    if beyond as f64 <= limit {
        return 1;
    }
    for (k, x) in tally.interval_counts().filter(|&(k, _)| k > 1) {
        beyond -= x;
        if beyond as f64 <= limit {
            return k;
        }
    }
    unreachable!("nothing lies beyond the last sampled interval")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalProgress {
    pub interval: usize,
    /// Grid index the next test resumes from.
    pub gs: usize,
    /// Grid index at which the interval was marked.
    pub marked_at: Option<usize>,
    pub estimate: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    /// Rounds completed.
    pub round: u32,
    pub k0: u64,
    pub h: usize,
    pub intervals: Vec<IntervalProgress>,
    /// Draws of each completed round.
    pub round_draws: Vec<u64>,
}

impl RoundState {
    pub fn new(h2: &[usize], k0: u64, h: usize) -> Self {
        Self {
            round: 0,
            k0,
            h,
            intervals: h2
                .iter()
                .map(|&interval| IntervalProgress {
                    interval,
                    gs: 1,
                    marked_at: None,
                    estimate: None,
                })
                .collect(),
            round_draws: Vec::new(),
        }
    }

    /// Size of the next round, `2^j K0`.
    pub fn next_k(&self) -> u64 {
        self.k0 << (self.round + 1)
    }

    pub fn all_marked(&self) -> bool {
        self.intervals.iter().all(|p| p.estimate.is_some())
    }
}

/// One round: fresh draws, then for each unmarked interval the grid points
/// from `gs` up to the largest one the samples support.
pub fn adaptive_round(
    sampler: &mut impl WeightedSampler,
    mut state: RoundState,
    scheme: &IntervalScheme,
    config: &AdaptiveConfig,
) -> Result<RoundState> {
    if state.all_marked() {
        return Ok(state);
    }
    if state.round >= MAX_ROUND {
        return Err(Error::BudgetExceeded {
            planned: state.next_k(),
            limit: state.k0 << MAX_ROUND,
        });
    }
    let k = state.next_k();
    let mut logs: HashMap<usize, Vec<usize>> = state
        .intervals
        .iter()
        .filter(|p| p.estimate.is_none())
        .map(|p| (p.interval, Vec::new()))
        .collect();
    for _ in 0..k {
        let s = sampler.sample_one();
        if let Some(log) = scheme.locate(s.time).and_then(|i| logs.get_mut(&i)) {
            log.push(s.job);
        }
    }
    state.round += 1;
    state.round_draws.push(k);

    let h = state.h;
    let root_e = std::f64::consts::E.sqrt();
    for p in state.intervals.iter_mut().filter(|p| p.estimate.is_none()) {
        let log = &logs[&p.interval];
        let Some(t) = config.largest_grid_point(h, log.len()) else {
            continue;
        };
        if t < p.gs {
            continue;
        }
        let u_t = config.groups(h, t);
        let profile = GroupProfile::by_count(log, u_t);
        for i in p.gs..=t {
            let l = config.grid(i);
            let len = prefix_len(l);
            let u_i = config.groups(h, i);
            let g = profile.distinct_groups(len, u_i);
            log::debug!(
                "round {} interval {} l={l:.3}: {g}/{u_i} leading groups distinct, {}/{u_t} overall",
                state.round,
                p.interval,
                profile.distinct_groups(len, u_t)
            );
            if g as f64 <= u_i as f64 / root_e {
                p.marked_at = Some(i);
                p.estimate = Some(count_from_grid(l));
                break;
            }
        }
        if p.estimate.is_none() {
            p.gs = t;
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRun {
    pub sketch: SketchInstance,
    pub w0: f64,
    pub h: usize,
    pub k_init: u64,
    pub k0: u64,
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    pub rounds: RoundState,
    pub draws: u64,
}

fn check_budget(config: &AdaptiveConfig, used: u64, next: u64) -> Result<()> {
    match config.max_draws {
        Some(limit) if used + next > limit => Err(Error::BudgetExceeded {
            planned: used + next,
            limit,
        }),
        _ => Ok(()),
    }
}

pub fn sketch_adaptive(
    sampler: &mut impl WeightedSampler,
    config: &AdaptiveConfig,
) -> Result<AdaptiveRun> {
    let start = sampler.draws_used();

    let k_init = config.k_init();
    check_budget(config, 0, k_init)?;
    let mut first = Vec::with_capacity(k_init as usize);
    for _ in 0..k_init {
        first.push(sampler.sample_one());
    }
    let w0 = first.iter().map(|s| s.time).fold(0.0, f64::max);
    let scheme = IntervalScheme::new(w0, config.delta)?;
    let h = determine_h(&SampleTally::from_samples(&scheme, &first), config);

    let k0 = config.k0(h);
    check_budget(config, sampler.draws_used() - start, k0)?;
    let mut tally = SampleTally::new();
    for _ in 0..k0 {
        let s = sampler.sample_one();
        tally.record(&scheme, s);
    }
    let (h1, h2) = classify_intervals(&tally, h, config.interval_min(h), config.h1_threshold(h));
    log::debug!("adaptive: w0 {w0}, h {h}, K0 {k0}, H1 {h1:?}, H2 {h2:?}");
    let mut entries: Vec<SketchEntry> = h1
        .iter()
        .map(|&k| SketchEntry {
            interval: k,
            count: count_h1(&tally, k),
            time: scheme.upper(k),
            saturated: false,
        })
        .collect();
    drop(tally);

    let mut state = RoundState::new(&h2, k0, h);
    while !state.all_marked() {
        check_budget(config, sampler.draws_used() - start, state.next_k())?;
        state = adaptive_round(sampler, state, &scheme, config)?;
    }
    entries.extend(state.intervals.iter().map(|p| SketchEntry {
        interval: p.interval,
        count: p.estimate.expect("all intervals marked"),
        time: scheme.upper(p.interval),
        saturated: false,
    }));

    Ok(AdaptiveRun {
        sketch: SketchInstance::new(scheme, entries)?,
        w0,
        h,
        k_init,
        k0,
        h1,
        h2,
        rounds: state,
        draws: sampler.draws_used() - start,
    })
}
