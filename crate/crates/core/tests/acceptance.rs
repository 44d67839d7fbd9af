//! End-to-end acceptance checks. Each test writes one PASS/FAIL line to
//! stderr (bypassing the test harness capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subsketch_core::bounds::heavy_job_tail_grid;
use subsketch_core::harness::validate::{self, CriterionResult};
use subsketch_core::interval::IntervalScheme;
use subsketch_core::scheduler::{
    deterministic_sketch, deterministic_sketch_at, exact_opt, expand_schedule, meta_approx,
    solve_largest, SolverStrategy,
};
use subsketch_core::stats::linear_fit;
use subsketch_core::{
    validate_sketch_quality, AdaptiveConfig, Instance, SketchInstance, SketchSchedule,
};

/// Relative slack on exact comparisons.
const EXACT_TOL: f64 = 1e-9;

const SANDWICH_SKETCHES: usize = 500;
const SANDWICH_MAX_JOBS: u64 = 12;
const EXPANSION_INSTANCES: usize = 100;
const EXPANSION_N: u64 = 12;
const EXPANSION_ALPHA: f64 = 0.2;
const CHISQ_TRIALS: usize = 200;
const COLLISION_TRIALS: usize = 100_000;
const BIRTHDAY_TRIALS: usize = 200;
const KNOWN_TRIALS: usize = 50;
const ADAPTIVE_TRIALS: usize = 50;
const SUBLINEAR_TRIALS: usize = 5;
const DETERMINISTIC_INSTANCES: usize = 200;
const LINEAR_SIZES: [usize; 3] = [100_000, 500_000, 1_000_000];
const LINEAR_MIN_R2: f64 = 0.99;
const LINEAR_REPEATS: usize = 9;
const TAIL_GRID_STEPS: usize = 200;

fn line(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    writeln!(err, "[{verdict}] criterion {id:>2} {name}: {detail}").unwrap();
}

fn suite_line(id: u32, name: &str, criteria: &[CriterionResult]) {
    let pass = criteria.iter().all(|c| c.pass);
    let detail = criteria
        .iter()
        .map(|c| {
            let mark = if c.pass { "ok" } else { "MISS" };
            format!("{} {:.4} vs {:.4} {mark}", c.name, c.observed, c.threshold)
        })
        .collect::<Vec<_>>()
        .join("; ");
    line(id, name, pass, &detail);
    assert!(pass, "{criteria:#?}");
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo * (1.0 - EXACT_TOL) && x <= hi * (1.0 + EXACT_TOL)
}

fn random_sketch(rng: &mut impl Rng) -> SketchInstance {
    let scheme = IntervalScheme::new(rng.random_range(1.0..10.0), rng.random_range(0.05..0.3)).unwrap();
    let total = rng.random_range(1..=SANDWICH_MAX_JOBS);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..total {
        *counts.entry(rng.random_range(1..=15usize)).or_insert(0u64) += 1;
    }
    SketchInstance::from_counts(scheme, counts).unwrap()
}

#[test]
fn c01_meta_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = 0;
    let mut worst: f64 = 1.0;
    for i in 0..SANDWICH_SKETCHES {
        let sketch = random_sketch(&mut rng);
        let m = [2, 3][i % 2];
        let eps = [0.2, 0.5][(i / 2) % 2];
        let opt = exact_opt(&sketch.expand(), m).unwrap();
        let t = meta_approx(&sketch, m, eps, SolverStrategy::Auto).unwrap().t;
        worst = worst.max(t / opt / (1.0 + eps));
        if !within(t, opt, (1.0 + eps) * opt) {
            failures += 1;
        }
    }
    let detail = format!(
        "{}/{SANDWICH_SKETCHES} sketches in [OPT, (1+eps) OPT], worst T/((1+eps) OPT) {worst:.4}",
        SANDWICH_SKETCHES - failures
    );
    line(1, "meta-algorithm sandwich", failures == 0, &detail);
    assert_eq!(failures, 0);
}

/// Instance of `EXPANSION_N` jobs over two to four distinct times.
fn clustered_instance(rng: &mut impl Rng) -> Instance {
    let types = rng.random_range(2..=4usize);
    let times: Vec<f64> = (0..types).map(|_| rng.random_range(1.0..10.0)).collect();
    let jobs = (0..EXPANSION_N).map(|_| times[rng.random_range(0..types)]).collect();
    Instance::new(jobs).unwrap()
}

/// Counts moved by `floor(alpha n_k)` in a random direction, never below 1.
fn perturb(sketch: &SketchInstance, rng: &mut impl Rng) -> SketchInstance {
    let counts = sketch.entries().iter().map(|e| {
        let shift = (EXPANSION_ALPHA * e.count as f64).floor() as u64;
        let c = if rng.random_bool(0.5) { e.count + shift } else { e.count - shift };
        (e.interval, c.max(1))
    });
    SketchInstance::from_counts(*sketch.scheme(), counts.collect::<Vec<_>>()).unwrap()
}

/// Sketch schedule realizing `OPT(sketch)`.
fn optimal_sketch_schedule(sketch: &SketchInstance, m: usize) -> SketchSchedule {
    let solved = solve_largest(&sketch.expand(), m, SolverStrategy::ExactBb).unwrap();
    let mut counts = vec![vec![0u64; sketch.len()]; m];
    let mut machines = solved.assignment.iter();
    for (j, e) in sketch.entries().iter().enumerate() {
        for _ in 0..e.count {
            counts[*machines.next().unwrap()][j] += 1;
        }
    }
    SketchSchedule::new(sketch, counts).unwrap()
}

#[test]
fn c02_expansion_bound() {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut held, mut max_alpha, mut worst): (usize, f64, f64) = (0, 0.0, 0.0);
    for _ in 0..EXPANSION_INSTANCES {
        let inst = clustered_instance(&mut rng);
        let exact = deterministic_sketch_at(&inst, 0.05).unwrap();
        let sketch = perturb(&exact, &mut rng);
        let opt = exact_opt(inst.times(), m).unwrap();
        let quality = validate_sketch_quality(&inst, &sketch, m, opt).unwrap();
        let schedule = optimal_sketch_schedule(&sketch, m);
        let expanded = expand_schedule(&inst, &sketch, &schedule).unwrap().schedule.makespan();
        let bound = quality.expansion_factor(m) * opt;
        max_alpha = max_alpha.max(quality.alpha);
        worst = worst.max(expanded / bound);
        if expanded <= bound * (1.0 + EXACT_TOL) {
            held += 1;
        }
    }
    let detail = format!(
        "{held}/{EXPANSION_INSTANCES} within bound, max measured alpha {max_alpha:.3}, worst makespan/bound {worst:.4}"
    );
    line(2, "sketch-to-schedule bound", held == EXPANSION_INSTANCES, &detail);
    assert_eq!(held, EXPANSION_INSTANCES);
}

#[test]
fn c03_sampler_distribution() {
    suite_line(3, "sampler chi-square and path length", &validate::sampler_chisq(CHISQ_TRIALS, 303).unwrap());
}

#[test]
fn c04_collision_bounds() {
    suite_line(4, "collision probability bounds", &validate::collision_bounds(COLLISION_TRIALS, 404).unwrap());
}

#[test]
fn c05_birthday_envelope() {
    suite_line(5, "birthday envelope", &validate::birthday_envelope(BIRTHDAY_TRIALS, 505).unwrap());
}

#[test]
fn c06_known_n_envelope() {
    suite_line(6, "known-n sketch envelope", &validate::known_n_opt(KNOWN_TRIALS, 606).unwrap());
}

#[test]
fn c07_adaptive_envelope() {
    suite_line(7, "adaptive end-to-end envelope", &validate::adaptive_opt(ADAPTIVE_TRIALS, 707).unwrap());
}

#[test]
fn c08_sublinearity() {
    let out = validate::sublinearity(SUBLINEAR_TRIALS, 808).unwrap();
    suite_line(8, "adaptive draw-count slope", &out.criteria);
}

/// Minimum wall time of the deterministic sketch per instance. Repeats are
/// interleaved across instances so background load hits every size alike.
fn min_times_ms(instances: &[Instance], eps: f64) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; instances.len()];
    for _ in 0..LINEAR_REPEATS {
        for (inst, b) in instances.iter().zip(&mut best) {
            let start = Instant::now();
            std::hint::black_box(deterministic_sketch(inst, eps).unwrap());
            *b = b.min(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    best
}

#[test]
fn c09_deterministic_scheme() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut held = 0;
    for i in 0..DETERMINISTIC_INSTANCES {
        let n = rng.random_range(1..=12usize);
        let m = [2, 3][i % 2];
        let eps = [0.2, 0.5][(i / 2) % 2];
        let inst = Instance::new((0..n).map(|_| rng.random_range(0.5..20.0)).collect()).unwrap();
        let sketch = deterministic_sketch(&inst, eps).unwrap();
        let t = meta_approx(&sketch, m, eps, SolverStrategy::Auto).unwrap().t;
        let opt = exact_opt(inst.times(), m).unwrap();
        if within(t, opt, (1.0 + eps) * opt) {
            held += 1;
        }
    }

    let eps = 0.5;
    let instances: Vec<Instance> = LINEAR_SIZES
        .iter()
        .map(|&n| Instance::new((0..n).map(|_| rng.random_range(1.0..1e4)).collect()).unwrap())
        .collect();
    let xs: Vec<f64> = LINEAR_SIZES.iter().map(|&n| n as f64).collect();
    let ys = min_times_ms(&instances, eps);
    let fit = linear_fit(&xs, &ys);
    let pass = held == DETERMINISTIC_INSTANCES && fit.r_squared >= LINEAR_MIN_R2;
    let times = ys.iter().map(|t| format!("{t:.2}ms")).collect::<Vec<_>>().join(", ");
    let detail = format!(
        "{held}/{DETERMINISTIC_INSTANCES} in [OPT, (1+eps) OPT]; linear fit R^2 {:.4} (min {LINEAR_MIN_R2}) over {times}",
        fit.r_squared
    );
    line(9, "deterministic scheme", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c10_heavy_job_tail_grid() {
    let configs = [(2, 0.1, 1.0 / 12.0, 20), (1, 0.05, 1e-3, 50), (3, 0.2, 1e-2, 100)];
    let mut worst: f64 = 0.0;
    for (m, delta, gamma0, h) in configs {
        let c = AdaptiveConfig::new(m, delta, gamma0).unwrap();
        worst = worst.max(heavy_job_tail_grid(c.beta0(h), c.nominal_k0(h), gamma0, TAIL_GRID_STEPS));
    }
    let pass = worst <= 1.0 + EXACT_TOL;
    let detail = format!("worst tail / (gamma0/e) {worst:.12} over 3 configs");
    line(10, "heavy-job tail grid", pass, &detail);
    assert!(pass);
}
