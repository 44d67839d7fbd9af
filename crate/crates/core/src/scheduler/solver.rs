//! Solvers for the handful of largest jobs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Most jobs the branch-and-bound solver accepts.
pub const EXACT_BB_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStrategy {
    /// Branch-and-bound over machine assignments; optimal.
    ExactBb,
    /// Longest processing time first.
    Lpt,
    /// `ExactBb` up to [`EXACT_BB_LIMIT`] jobs, `Lpt` beyond.
    Auto,
}

impl SolverStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exact_bb" | "exact" => Ok(Self::ExactBb),
            "lpt" => Ok(Self::Lpt),
            "auto" => Ok(Self::Auto),
            other => Err(Error::Config(format!("unknown solver `{other}`"))),
        }
    }
}

/// Worst-case ratio of LPT on `m` machines, `4/3 - 1/(3m)`.
pub fn lpt_ratio(m: usize) -> f64 {
    4.0 / 3.0 - 1.0 / (3.0 * m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub makespan: f64,
    /// Machine of each input job, in input order.
    pub assignment: Vec<usize>,
    /// Strategy that actually ran.
    pub strategy: SolverStrategy,
    /// Proven bound on `makespan / OPT`.
    pub ratio: f64,
}

pub fn solve_largest(jobs: &[f64], m: usize, strategy: SolverStrategy) -> Result<SolverOutcome> {
    if m == 0 {
        return Err(Error::Config("machine count must be at least 1".into()));
    }
    let strategy = match strategy {
        SolverStrategy::Auto if jobs.len() <= EXACT_BB_LIMIT => SolverStrategy::ExactBb,
        SolverStrategy::Auto => SolverStrategy::Lpt,
        s => s,
    };
    let assignment = match strategy {
        SolverStrategy::ExactBb => {
            if jobs.len() > EXACT_BB_LIMIT {
                return Err(Error::Strategy(format!(
                    "exact_bb accepts at most {EXACT_BB_LIMIT} jobs, got {}; use lpt",
                    jobs.len()
                )));
            }
            branch_and_bound(jobs, m)
        }
        _ => lpt(jobs, m),
    };
    let makespan = makespan_of(jobs, m, &assignment);
    Ok(SolverOutcome {
        makespan,
        assignment,
        strategy,
        ratio: if strategy == SolverStrategy::ExactBb { 1.0 } else { lpt_ratio(m) },
    })
}

fn makespan_of(jobs: &[f64], m: usize, assignment: &[usize]) -> f64 {
    crate::sketch::machine_loads(jobs, m, assignment)
        .into_iter()
        .fold(0.0, f64::max)
}

fn order_desc(jobs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| jobs[b].total_cmp(&jobs[a]).then(a.cmp(&b)));
    order
}

/// Index of the least-loaded machine, lowest index on ties.
pub(crate) fn least_loaded(loads: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in loads.iter().enumerate().skip(1) {
        if l < loads[best] {
            best = i;
        }
    }
    best
}

fn lpt(jobs: &[f64], m: usize) -> Vec<usize> {
    let mut loads = vec![0.0; m];
    let mut assignment = vec![0; jobs.len()];
    for j in order_desc(jobs) {
        let i = least_loaded(&loads);
        loads[i] += jobs[j];
        assignment[j] = i;
    }
    assignment
}

struct Search {
    times: Vec<f64>,
    suffix: Vec<f64>,
    loads: Vec<f64>,
    current: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
    lower: f64,
}

impl Search {
    fn run(&mut self, depth: usize) {
        if self.best <= self.lower * (1.0 + 1e-12) {
            return;
        }
        if depth == self.times.len() {
            let span = self.loads.iter().copied().fold(0.0, f64::max);
            if span < self.best {
                self.best = span;
                self.best_assignment = self.current.clone();
            }
            return;
        }
        let m = self.loads.len() as f64;
        let span = self.loads.iter().copied().fold(0.0, f64::max);
        let filled: f64 = self.loads.iter().sum();
        if span.max((filled + self.suffix[depth]) / m) >= self.best {
            return;
        }
        let p = self.times[depth];
        let mut machines: Vec<usize> = (0..self.loads.len()).collect();
        machines.sort_by(|&a, &b| self.loads[a].total_cmp(&self.loads[b]).then(a.cmp(&b)));
        let mut tried: Vec<f64> = Vec::new();
        for i in machines {
            let load = self.loads[i];
            // machines with equal load are interchangeable
            if tried.contains(&load) {
                continue;
            }
            tried.push(load);
            if load + p >= self.best {
                continue;
            }
            self.loads[i] += p;
            self.current[depth] = i;
            self.run(depth + 1);
            self.loads[i] = load;
        }
    }
}

fn branch_and_bound(jobs: &[f64], m: usize) -> Vec<usize> {
    if jobs.is_empty() {
        return Vec::new();
    }
    let order = order_desc(jobs);
    let times: Vec<f64> = order.iter().map(|&j| jobs[j]).collect();
    let mut suffix = vec![0.0; times.len() + 1];
    for d in (0..times.len()).rev() {
        suffix[d] = suffix[d + 1] + times[d];
    }
    let seed = lpt(jobs, m);
    let seed_span = makespan_of(jobs, m, &seed);
    let mut search = Search {
        lower: times[0].max(suffix[0] / m as f64),
        best: seed_span,
        best_assignment: order.iter().map(|&j| seed[j]).collect(),
        current: vec![0; times.len()],
        loads: vec![0.0; m],
        suffix,
        times,
    };
    search.run(0);
    let mut assignment = vec![0; jobs.len()];
    for (d, &j) in order.iter().enumerate() {
        assignment[j] = search.best_assignment[d];
    }
    assignment
}
