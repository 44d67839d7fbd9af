//! End-to-end estimation on one instance.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::job_types;
use super::report::{ExperimentReport, Mode, ReportParams, Validation};
use crate::adaptive::{sketch_adaptive, AdaptiveConfig};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::known::{sketch_known_n, KnownNConfig};
use crate::params::Params;
use crate::sampler::{SamplerIndex, WeightedSampler};
use crate::scheduler::{
    deterministic_sketch, exact_opt_grouped, expand_schedule, meta_approx, meta_sketch_schedule,
    SolverStrategy,
};
use crate::sketch::{ConcreteSchedule, SketchInstance};

/// Ratio slack when checking a validation envelope.
const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub mode: Mode,
    pub params: Params,
    pub seed: u64,
    pub budget_scale: f64,
    pub max_draws: Option<u64>,
    pub solver: SolverStrategy,
    pub validate: bool,
    pub emit_schedule: bool,
}

impl EstimateOptions {
    pub fn new(mode: Mode, params: Params, seed: u64) -> Self {
        Self {
            mode,
            params,
            seed,
            budget_scale: 1.0,
            max_draws: None,
            solver: SolverStrategy::Auto,
            validate: false,
            emit_schedule: false,
        }
    }

    /// Ratio envelope `T / OPT` is checked against.
    pub fn envelope(&self) -> (f64, f64) {
        let eps = self.params.epsilon;
        match self.mode {
            Mode::Deterministic => (1.0, 1.0 + eps),
            Mode::Known | Mode::Adaptive => (1.0 - 3.0 * eps, 1.0 + 3.0 * eps),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub report: ExperimentReport,
    pub sketch: SketchInstance,
    pub schedule: Option<ConcreteSchedule>,
}

/// Sketch of `instance` in the requested mode and the draws it cost.
pub fn build_sketch(instance: &Instance, options: &EstimateOptions) -> Result<(SketchInstance, u64)> {
    let p = &options.params;
    match options.mode {
        Mode::Deterministic => Ok((deterministic_sketch(instance, p.epsilon)?, 0)),
        Mode::Known => {
            let mut config = KnownNConfig::new(instance.n(), p.m, p.delta(), p.gamma0)?
                .with_budget_scale(options.budget_scale)?;
            if let Some(limit) = options.max_draws {
                config = config.with_max_draws(limit);
            }
            let mut sampler = SamplerIndex::build(instance, options.seed)?;
            let run = sketch_known_n(&mut sampler, &config)?;
            Ok((run.sketch, sampler.draws_used()))
        }
        Mode::Adaptive => {
            let mut config = AdaptiveConfig::new(p.m, p.delta(), p.gamma0)?
                .with_budget_scale(options.budget_scale)?;
            if let Some(limit) = options.max_draws {
                config = config.with_max_draws(limit);
            }
            let mut sampler = SamplerIndex::build(instance, options.seed)?;
            let run = sketch_adaptive(&mut sampler, &config)?;
            Ok((run.sketch, sampler.draws_used()))
        }
    }
}

/// Optimal makespan by the exact oracle on grouped job types.
pub fn exact_instance_opt(instance: &Instance, m: usize) -> Result<f64> {
    exact_opt_grouped(&job_types(instance.times()), m)
}

pub fn run_estimate(
    instance: &Instance,
    source: &str,
    options: &EstimateOptions,
) -> Result<EstimateOutcome> {
    let p = &options.params;
    let start = Instant::now();
    let (sketch, draws) = build_sketch(instance, options)?;
    let (estimate, schedule) = if options.emit_schedule {
        let ms = meta_sketch_schedule(&sketch, p.m, p.epsilon, options.solver)?;
        let expansion = expand_schedule(instance, &sketch, &ms.schedule)?;
        (ms.t, Some(expansion.schedule))
    } else {
        (meta_approx(&sketch, p.m, p.epsilon, options.solver)?.t, None)
    };
    let wall_time_ms = start.elapsed().as_millis() as u64;

    let validation = if options.validate {
        let opt = exact_instance_opt(instance, p.m)?;
        if !(opt > 0.0) {
            return Err(Error::Infeasible("exact optimum is zero".into()));
        }
        let ratio = estimate / opt;
        let (lower, upper) = options.envelope();
        Some(Validation {
            exact_opt: opt,
            ratio,
            lower,
            upper,
            pass: ratio >= lower - ENVELOPE_SLACK && ratio <= upper + ENVELOPE_SLACK,
        })
    } else {
        None
    };

    let sketch_delta = match options.mode {
        Mode::Deterministic => p.epsilon / 8.0,
        _ => p.delta(),
    };
    let report = ExperimentReport {
        mode: options.mode,
        source: source.to_owned(),
        params: ReportParams {
            m: p.m,
            epsilon: p.epsilon,
            gamma0: p.gamma0,
            seed: options.seed,
            sketch_delta,
            budget_scale: options.budget_scale,
        },
        n: instance.n(),
        estimate,
        sketch_entries: sketch.len(),
        draws_used: draws,
        wall_time_ms,
        validation,
        expanded_makespan: schedule.as_ref().map(|s| s.makespan()),
    };
    Ok(EstimateOutcome {
        report,
        sketch,
        schedule,
    })
}
