//! Makespan estimate and sketch schedule from a sketch instance.
//!
//! The `ceil(m / delta)` largest sketch jobs go to a solver; the estimate is
//! `(1+delta) max(T0, P/m)` with `delta = epsilon / 3`. The schedule variant
//! then pours the remaining jobs, interval by interval, onto machines in
//! index order up to the estimate.

use serde::{Deserialize, Serialize};

use super::solver::{solve_largest, SolverStrategy};
use crate::error::{Error, Result};
use crate::params::largest_job_count;
use crate::sketch::{SketchInstance, SketchSchedule};

/// Relative slack when counting how many jobs still fit under `T`.
const FIT_SLACK: f64 = 1e-9;

/// How an estimate was obtained and what it is worth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCertificate {
    pub delta: f64,
    pub h: usize,
    /// Jobs actually handed to the solver.
    pub solved_jobs: usize,
    pub solver: SolverStrategy,
    pub solver_ratio: f64,
    /// Makespan of the solver's schedule.
    pub t0: f64,
    pub average_load: f64,
    /// `T / OPT(sketch)` is at most this.
    pub approximation_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaOutcome {
    pub t: f64,
    pub certificate: MetaCertificate,
}

struct Core {
    outcome: MetaOutcome,
    /// Solver assignment of the largest jobs, in `largest_jobs` order.
    assignment: Vec<usize>,
}

fn validate(m: usize, epsilon: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Config("machine count must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

fn core(
    sketch: &SketchInstance,
    m: usize,
    epsilon: f64,
    strategy: SolverStrategy,
) -> Result<Core> {
    validate(m, epsilon)?;
    let delta = epsilon / 3.0;
    let h = largest_job_count(m, delta);
    let largest = sketch.largest_jobs(h);
    let solved = solve_largest(&largest, m, strategy)?;
    let t0 = solved.makespan;
    let average_load = sketch.total_time() / m as f64;
    let t = (1.0 + delta) * t0.max(average_load);
    Ok(Core {
        outcome: MetaOutcome {
            t,
            certificate: MetaCertificate {
                delta,
                h,
                solved_jobs: largest.len(),
                solver: solved.strategy,
                solver_ratio: solved.ratio,
                t0,
                average_load,
                approximation_factor: (1.0 + delta) * solved.ratio.max(1.0),
            },
        },
        assignment: solved.assignment,
    })
}

/// Approximate optimal makespan of the sketch. Zero for an empty sketch.
pub fn meta_approx(
    sketch: &SketchInstance,
    m: usize,
    epsilon: f64,
    strategy: SolverStrategy,
) -> Result<MetaOutcome> {
    Ok(core(sketch, m, epsilon, strategy)?.outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSchedule {
    pub t: f64,
    pub schedule: SketchSchedule,
    pub certificate: MetaCertificate,
    /// `(machine, interval)` cells visited by the fill loop.
    pub fill_iterations: usize,
}

/// Estimate plus a sketch schedule whose loads stay within it.
pub fn meta_sketch_schedule(
    sketch: &SketchInstance,
    m: usize,
    epsilon: f64,
    strategy: SolverStrategy,
) -> Result<MetaSchedule> {
    let Core {
        outcome,
        assignment,
    } = core(sketch, m, epsilon, strategy)?;
    let entries = sketch.entries();
    let t_count = entries.len();
    let mut counts = vec![vec![0u64; t_count]; m];
    let mut loads = vec![0.0; m];

    // the solved jobs are a prefix of the entries in order
    let mut remaining: Vec<u64> = entries.iter().map(|e| e.count).collect();
    let mut entry = 0;
    for &machine in &assignment {
        while remaining[entry] == 0 {
            entry += 1;
        }
        counts[machine][entry] += 1;
        loads[machine] += entries[entry].time;
        remaining[entry] -= 1;
    }

    let t = outcome.t;
    let mut iterations = 0;
    let mut k0 = remaining.iter().position(|&r| r > 0).unwrap_or(t_count);
    let mut i = 0;
    while k0 < t_count {
        if i == m {
            return Err(Error::Infeasible(format!(
                "interval {} has {} jobs left after filling all machines to {t}",
                entries[k0].interval, remaining[k0]
            )));
        }
        let p = entries[k0].time;
        let room = ((t - loads[i]) / p + FIT_SLACK).floor().max(0.0);
        let placed = remaining[k0].min(room as u64);
        loads[i] += placed as f64 * p;
        counts[i][k0] += placed;
        remaining[k0] -= placed;
        iterations += 1;
        if remaining[k0] == 0 {
            k0 += 1;
        } else {
            i += 1;
        }
    }

    Ok(MetaSchedule {
        t,
        schedule: SketchSchedule::new(sketch, counts)?,
        certificate: outcome.certificate,
        fill_iterations: iterations,
    })
}
