//! Monte Carlo validation suites.
//!
//! Each suite runs independent trials seeded `seed + trial` in parallel and
//! reports one line per criterion. Probability thresholds carry a fixed
//! 0.05 slack for finite-trial noise.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{job_types, Family, GeneratorSpec};
use crate::adaptive::{sketch_adaptive, AdaptiveConfig};
use crate::bounds::{pr_lower, pr_upper};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::known::{sketch_known_n, KnownNConfig};
use crate::params::C;
use crate::sampler::{SamplerIndex, WeightedSampler};
use crate::scheduler::{exact_opt_grouped, meta_approx, SolverStrategy};
use crate::sketch::SketchInstance;
use crate::stats::{chi_square_test, linear_fit, median, Proportion};

/// Added to every probability threshold.
pub const SLACK: f64 = 0.05;

pub const CHISQ_SIGNIFICANCE: f64 = 0.001;
pub const CHISQ_SIZES: [usize; 3] = [2, 10, 100];
pub const CHISQ_DRAWS_PER_ELEMENT: usize = 50;

pub const COLLISION_CASES: [(usize, f64); 4] = [(50, 0.05), (50, 0.1), (200, 0.05), (200, 0.1)];
/// Points of the `k` grid per collision case.
pub const COLLISION_K_POINTS: usize = 10;
pub const COLLISION_SIGMAS: f64 = 3.0;

pub const BIRTHDAY_SIZES: [usize; 2] = [1_000, 10_000];
pub const BIRTHDAY_DELTA: f64 = 0.1;
/// Draws per job in a birthday trial; the known-n budget is scaled to
/// this. Low enough that no single job reaches the direct-count threshold.
pub const BIRTHDAY_DRAWS_PER_JOB: f64 = 40.0;

pub const KNOWN_N: usize = 10_000;
pub const KNOWN_M: usize = 2;
pub const KNOWN_DELTA: f64 = 0.1;
pub const KNOWN_DRAWS: f64 = 1e6;
pub const KNOWN_PASS_RATE: f64 = 0.9;

pub const ADAPTIVE_N: usize = 10_000;
pub const ADAPTIVE_M: usize = 2;
pub const ADAPTIVE_EPSILON: f64 = 0.5;
pub const ADAPTIVE_DELTA: f64 = 0.2;
pub const ADAPTIVE_BUDGET_SCALE: f64 = 1e-3;

pub const SUBLINEAR_SIZES: [usize; 3] = [1_000, 10_000, 100_000];
pub const SUBLINEAR_MAX_SLOPE: f64 = 0.6;
/// The draw-count suite runs the adaptive sketch at its nominal budget.
pub const SUBLINEAR_BUDGET_SCALE: f64 = 1.0;

pub const GAMMA0: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    CollisionBounds,
    BirthdayEnvelope,
    KnownNOpt,
    AdaptiveOpt,
    SamplerChisq,
    Sublinearity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::CollisionBounds,
        Suite::BirthdayEnvelope,
        Suite::KnownNOpt,
        Suite::AdaptiveOpt,
        Suite::SamplerChisq,
        Suite::Sublinearity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CollisionBounds => "collision_bounds",
            Suite::BirthdayEnvelope => "birthday_envelope",
            Suite::KnownNOpt => "known_n_opt",
            Suite::AdaptiveOpt => "adaptive_opt",
            Suite::SamplerChisq => "sampler_chisq",
            Suite::Sublinearity => "sublinearity",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownSuite(name.to_owned()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Wilson 95% interval of `observed` when it is a frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CriterionResult {
    fn at_least(name: impl Into<String>, p: Proportion, threshold: f64) -> Self {
        Self {
            name: name.into(),
            observed: p.value(),
            threshold,
            pass: p.value() >= threshold,
            interval: Some(p.wilson(1.96)),
            detail: format!("{}/{}", p.successes, p.trials),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteSummary {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

pub fn run_validation_suite(suite: &str, trials: usize, seed: u64) -> Result<SuiteSummary> {
    let suite = Suite::parse(suite)?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let criteria = match suite {
        Suite::SamplerChisq => sampler_chisq(trials, seed)?,
        Suite::CollisionBounds => collision_bounds(trials, seed)?,
        Suite::BirthdayEnvelope => birthday_envelope(trials, seed)?,
        Suite::KnownNOpt => known_n_opt(trials, seed)?,
        Suite::AdaptiveOpt => adaptive_opt(trials, seed)?,
        Suite::Sublinearity => sublinearity(trials, seed)?.criteria,
    };
    Ok(SuiteSummary {
        suite,
        trials,
        seed,
        criteria,
    })
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

fn successes(outcomes: &[bool]) -> Proportion {
    Proportion::new(outcomes.iter().filter(|&&b| b).count() as u64, outcomes.len() as u64)
}

/// Chi-square fit of the sampler on `[1, 2, 3]` and on random weight
/// vectors of each size in [`CHISQ_SIZES`], plus the per-draw node count.
pub fn sampler_chisq(trials: usize, seed: u64) -> Result<Vec<CriterionResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = vec![vec![1.0, 2.0, 3.0]];
    for &n in &CHISQ_SIZES {
        vectors.push((0..n).map(|_| rng.random_range(0.5..5.0)).collect());
    }
    let mut out = Vec::new();
    for w in &vectors {
        let n = w.len();
        let total: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let base = SamplerIndex::from_weights(w, seed)?;
        let results: Vec<(bool, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut s = base.with_seed(trial_seed(seed, t));
                let mut counts = vec![0u64; n];
                for _ in 0..CHISQ_DRAWS_PER_ELEMENT * n {
                    counts[s.sample_one().job] += 1;
                }
                let chi = chi_square_test(&counts, &probs, CHISQ_SIGNIFICANCE);
                (chi.pass, s.nodes_visited() as f64 / s.draws_used() as f64)
            })
            .collect();
        let pass: Vec<bool> = results.iter().map(|r| r.0).collect();
        out.push(CriterionResult::at_least(
            format!("chi-square n={n}"),
            successes(&pass),
            1.0 - CHISQ_SIGNIFICANCE - SLACK,
        ));
        let visits = results.iter().map(|r| r.1).fold(0.0, f64::max);
        let bound = 2.0 * (n as f64).log2() + 2.0;
        out.push(CriterionResult {
            name: format!("nodes per draw n={n}"),
            observed: visits,
            threshold: bound,
            pass: visits <= bound,
            interval: None,
            detail: String::new(),
        });
    }
    Ok(out)
}

/// `k` grid `2 ..= kmax` with `kmax < n / (2(1+delta))`.
pub fn collision_k_grid(n: usize, delta: f64) -> Vec<usize> {
    let limit = n as f64 / (2.0 * (1.0 + delta));
    let kmax = (limit.ceil() as usize - 1).max(2);
    let mut ks: Vec<usize> = (1..=COLLISION_K_POINTS)
        .map(|i| (2.0 + (kmax - 2) as f64 * i as f64 / COLLISION_K_POINTS as f64).round() as usize)
        .collect();
    ks.insert(0, 2);
    ks.dedup();
    ks
}

/// Weights spread evenly over `[1, 1+delta]`.
pub fn collision_weights(n: usize, delta: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 1.0 + delta * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// Empirical probability that `k` draws are pairwise distinct, over
/// `trials` independent runs.
pub fn all_distinct_frequency(base: &SamplerIndex, k: usize, trials: usize, seed: u64) -> Proportion {
    let n = base.len();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![u32::MAX; n],
            |stamp, t| {
                let mut s = base.with_seed(trial_seed(seed, t));
                let tag = t as u32;
                for _ in 0..k {
                    let j = s.sample_one().job;
                    if stamp[j] == tag {
                        return 0;
                    }
                    stamp[j] = tag;
                }
                1
            },
        )
        .sum();
    Proportion::new(hits, trials as u64)
}

pub fn collision_bounds(trials: usize, seed: u64) -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for (case, &(n, delta)) in COLLISION_CASES.iter().enumerate() {
        let base = SamplerIndex::from_weights(&collision_weights(n, delta), seed)?;
        let mut worst: f64 = 0.0;
        let mut misses = Vec::new();
        for (i, &k) in collision_k_grid(n, delta).iter().enumerate() {
            let s = seed.wrapping_add(((case * 1000 + i) as u64) << 32);
            let p = all_distinct_frequency(&base, k, trials, s).value();
            let (nf, kf) = (n as f64, k as f64);
            let (lb, ub) = (pr_lower(nf, kf, delta), pr_upper(nf, kf, delta));
            let sd = |q: f64| (q * (1.0 - q) / trials as f64).sqrt();
            // excess beyond the band in standard errors
            let below = if p < lb { (lb - p) / sd(lb).max(f64::MIN_POSITIVE) } else { 0.0 };
            let above = if p > ub { (p - ub) / sd(ub).max(f64::MIN_POSITIVE) } else { 0.0 };
            let z = below.max(above);
            if z > COLLISION_SIGMAS {
                misses.push(format!("k={k}: {p:.5} outside [{lb:.5}, {ub:.5}]"));
            }
            worst = worst.max(z);
        }
        out.push(CriterionResult {
            name: format!("all-distinct frequency n={n} delta={delta}"),
            observed: worst,
            threshold: COLLISION_SIGMAS,
            pass: worst <= COLLISION_SIGMAS,
            interval: None,
            detail: misses.join("; "),
        });
    }
    Ok(out)
}

/// `(lower, upper)` factors of the birthday envelope,
/// `(1+delta)^(-2c)` and `(1+delta)^(2c+2)`.
pub fn birthday_envelope_factors(delta: f64) -> (f64, f64) {
    let a = 1.0 + delta;
    (a.powi(-2 * C as i32), a.powi(2 * C as i32 + 2))
}

/// Known-n config whose main budget is scaled to about `draws`.
pub fn known_config_for(n: usize, m: usize, delta: f64, draws: f64) -> Result<KnownNConfig> {
    let c = KnownNConfig::new(n, m, delta, GAMMA0)?;
    let scale = draws / c.nominal_k();
    c.with_budget_scale(scale)
}

/// Outcome of one single-interval birthday trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthdayTrial {
    pub estimate: u64,
    pub in_h2: bool,
}

pub fn birthday_trial(n: usize, seed: u64) -> Result<BirthdayTrial> {
    let config = known_config_for(n, 2, BIRTHDAY_DELTA, BIRTHDAY_DRAWS_PER_JOB * n as f64)?;
    let mut s = SamplerIndex::from_weights(&vec![1.0; n], seed)?;
    let run = sketch_known_n(&mut s, &config)?;
    let estimate = run.sketch.entries().first().map_or(0, |e| e.count);
    Ok(BirthdayTrial {
        estimate,
        in_h2: run.h2.len() == 1 && run.h1.is_empty(),
    })
}

pub fn birthday_envelope(trials: usize, seed: u64) -> Result<Vec<CriterionResult>> {
    let (lo, hi) = birthday_envelope_factors(BIRTHDAY_DELTA);
    let threshold = 1.0 - 9.0 / 8.0 * GAMMA0 - SLACK;
    let mut out = Vec::new();
    for &n in &BIRTHDAY_SIZES {
        let runs = (0..trials)
            .into_par_iter()
            .map(|t| birthday_trial(n, trial_seed(seed, t)))
            .collect::<Result<Vec<_>>>()?;
        let inside: Vec<bool> = runs
            .iter()
            .map(|r| {
                let e = r.estimate as f64;
                e >= lo * n as f64 && e <= hi * n as f64
            })
            .collect();
        let mut c = CriterionResult::at_least(format!("estimate in envelope n_k={n}"), successes(&inside), threshold);
        let mut ests: Vec<f64> = runs.iter().map(|r| r.estimate as f64).collect();
        c.detail = format!("{}, median estimate {}", c.detail, median(&mut ests));
        out.push(c);
        let h2: Vec<bool> = runs.iter().map(|r| r.in_h2).collect();
        out.push(CriterionResult::at_least(format!("classified as birthday interval n_k={n}"), successes(&h2), 0.95));
    }
    Ok(out)
}

/// Optimal makespan of a sketch by the grouped exact oracle.
pub fn sketch_opt(sketch: &SketchInstance, m: usize) -> Result<f64> {
    let types: Vec<(f64, u64)> = sketch.entries().iter().map(|e| (e.time, e.count)).collect();
    exact_opt_grouped(&types, m)
}

/// `[(1 - 2cm delta)(1 - 4 delta), (1 + 6cm delta)(1 + delta)]`.
pub fn known_envelope(m: usize, delta: f64) -> (f64, f64) {
    let cm = C as f64 * m as f64;
    (
        (1.0 - 2.0 * cm * delta) * (1.0 - 4.0 * delta),
        (1.0 + 6.0 * cm * delta) * (1.0 + delta),
    )
}

fn two_point(n: usize, seed: u64) -> Result<Instance> {
    GeneratorSpec::new(Family::TwoPoint, n, seed).generate()
}

/// `OPT(sketch) / OPT` of one known-n run on the two-point family.
pub fn known_n_ratio(seed: u64, opt: f64) -> Result<f64> {
    let inst = two_point(KNOWN_N, seed)?;
    let config = known_config_for(KNOWN_N, KNOWN_M, KNOWN_DELTA, KNOWN_DRAWS)?;
    let mut s = SamplerIndex::build(&inst, seed)?;
    let run = sketch_known_n(&mut s, &config)?;
    Ok(sketch_opt(&run.sketch, KNOWN_M)? / opt)
}

pub fn known_n_opt(trials: usize, seed: u64) -> Result<Vec<CriterionResult>> {
    let opt = exact_opt_grouped(&job_types(two_point(KNOWN_N, seed)?.times()), KNOWN_M)?;
    let (lo, hi) = known_envelope(KNOWN_M, KNOWN_DELTA);
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| known_n_ratio(trial_seed(seed, t), opt))
        .collect::<Result<Vec<_>>>()?;
    let inside: Vec<bool> = ratios.iter().map(|&r| r >= lo && r <= hi).collect();
    let mut c = CriterionResult::at_least("sketch OPT within envelope", successes(&inside), KNOWN_PASS_RATE);
    let mut rs = ratios.clone();
    c.detail = format!("{}, envelope [{lo:.3}, {hi:.3}], median ratio {:.4}", c.detail, median(&mut rs));
    Ok(vec![c])
}

pub fn adaptive_config() -> Result<AdaptiveConfig> {
    AdaptiveConfig::new(ADAPTIVE_M, ADAPTIVE_DELTA, GAMMA0)?.with_budget_scale(ADAPTIVE_BUDGET_SCALE)
}

/// `T / OPT` of one adaptive run on the two-point family.
pub fn adaptive_ratio(seed: u64, opt: f64) -> Result<f64> {
    let inst = two_point(ADAPTIVE_N, seed)?;
    let mut s = SamplerIndex::build(&inst, seed)?;
    let run = sketch_adaptive(&mut s, &adaptive_config()?)?;
    let t = meta_approx(&run.sketch, ADAPTIVE_M, ADAPTIVE_EPSILON, SolverStrategy::Auto)?.t;
    Ok(t / opt)
}

pub fn adaptive_opt(trials: usize, seed: u64) -> Result<Vec<CriterionResult>> {
    let opt = exact_opt_grouped(&job_types(two_point(ADAPTIVE_N, seed)?.times()), ADAPTIVE_M)?;
    let (lo, hi) = (1.0 - 3.0 * ADAPTIVE_EPSILON, 1.0 + 3.0 * ADAPTIVE_EPSILON);
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| adaptive_ratio(trial_seed(seed, t), opt))
        .collect::<Result<Vec<_>>>()?;
    let inside: Vec<bool> = ratios.iter().map(|&r| r >= lo && r <= hi).collect();
    let mut c = CriterionResult::at_least(
        "estimate within (1 +- 3 eps) OPT",
        successes(&inside),
        1.0 - 9.0 * GAMMA0 - SLACK,
    );
    let mut rs = ratios.clone();
    c.detail = format!("{}, median ratio {:.4}", c.detail, median(&mut rs));
    Ok(vec![c])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublinearityOutcome {
    /// `(n, median draws)`.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub criteria: Vec<CriterionResult>,
}

/// Adaptive draw counts on the uniform family at each size, and the
/// least-squares slope of `ln draws` against `ln n` over all trials.
pub fn sublinearity(trials: usize, seed: u64) -> Result<SublinearityOutcome> {
    let config = adaptive_config()?.with_budget_scale(SUBLINEAR_BUDGET_SCALE)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut points = Vec::new();
    for &n in &SUBLINEAR_SIZES {
        let mut draws = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(seed, t);
                let inst = GeneratorSpec::new(Family::Uniform, n, s).generate()?;
                let mut sampler = SamplerIndex::build(&inst, s)?;
                sketch_adaptive(&mut sampler, &config)?;
                Ok(sampler.draws_used() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        for &d in &draws {
            xs.push((n as f64).ln());
            ys.push(d.ln());
        }
        points.push((n, median(&mut draws)));
    }
    let fit = linear_fit(&xs, &ys);
    let detail = points
        .iter()
        .map(|(n, d)| format!("n={n}: median {d:.0}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(SublinearityOutcome {
        slope: fit.slope,
        criteria: vec![CriterionResult {
            name: "log-log slope of draws against n".into(),
            observed: fit.slope,
            threshold: SUBLINEAR_MAX_SLOPE,
            pass: fit.slope <= SUBLINEAR_MAX_SLOPE,
            interval: None,
            detail,
        }],
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(matches!(Suite::parse("nope"), Err(Error::UnknownSuite(_))));
        assert!(run_validation_suite("sampler_chisq", 0, 1).is_err());
    }

    #[test]
    fn chisq_suite_passes() {
        let s = run_validation_suite("sampler_chisq", 20, 1).unwrap();
        assert!(s.pass(), "{:?}", s.criteria);
        assert_eq!(s.criteria.len(), 8);
    }

    #[test]
    fn k_grid_stays_in_range() {
        for &(n, delta) in &COLLISION_CASES {
            let ks = collision_k_grid(n, delta);
            assert_eq!(ks[0], 2);
            assert!(ks.windows(2).all(|w| w[0] < w[1]));
            let last = *ks.last().unwrap() as f64;
            assert!(last < n as f64 / (2.0 * (1.0 + delta)));
        }
    }

    #[test]
    fn frequency_matches_uniform_product() {
        let base = SamplerIndex::from_weights(&[1.0; 20], 0).unwrap();
        let p = all_distinct_frequency(&base, 4, 40_000, 3);
        let exact = 0.95 * 0.9 * 0.85;
        assert!((p.value() - exact).abs() < 4.0 * p.std_error(), "{}", p.value());
    }

    #[test]
    fn envelope_factors() {
        let (lo, hi) = birthday_envelope_factors(0.1);
        assert!((lo - 1.1f64.powi(-8)).abs() < 1e-15);
        assert!((hi - 1.1f64.powi(10)).abs() < 1e-12);
        let (lo, hi) = known_envelope(2, 0.1);
        assert!((lo - (1.0 - 1.6) * 0.6).abs() < 1e-12);
        assert!((hi - 5.8 * 1.1).abs() < 1e-12);
    }

    #[test]
    fn known_budget_targeting() {
        let c = known_config_for(10_000, 2, 0.1, 1e6).unwrap();
        assert!((c.k() as f64 - 1e6).abs() <= 1.0);
    }
}
