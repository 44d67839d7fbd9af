//! Exact-count sketch from two linear passes over the full instance.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::interval::IntervalScheme;
use crate::sketch::SketchInstance;

/// Sketch at `delta = epsilon / 8`.
pub fn deterministic_sketch(instance: &Instance, epsilon: f64) -> Result<SketchInstance> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    deterministic_sketch_at(instance, epsilon / 8.0)
}

/// Number of intervals kept: the smallest `h` with
/// `n * p_max (1-delta)^h <= delta * p_max`.
pub fn deterministic_horizon(n: usize, delta: f64) -> usize {
    let step = -(-delta).ln_1p();
    let mut h = ((n as f64 / delta).ln() / step).ceil().max(0.0) as usize;
    let holds = |h: usize| n as f64 * (-(h as f64) * step).exp() <= delta;
    while !holds(h) {
        h += 1;
    }
    while h > 0 && holds(h - 1) {
        h -= 1;
    }
    h
}

/// Pass one finds `p_max`, pass two counts jobs per interval up to the
/// horizon. Jobs below the horizon are dropped.
pub fn deterministic_sketch_at(instance: &Instance, delta: f64) -> Result<SketchInstance> {
    let p_max = instance.p_max();
    let scheme = IntervalScheme::new(p_max, delta)?;
    let h = deterministic_horizon(instance.n(), delta);
    let mut counts = vec![0u64; h + 1];
    for &p in instance.times() {
        let k = scheme.interval_index(p)?;
        if k <= h {
            counts[k] += 1;
        }
    }
    SketchInstance::from_counts(
        scheme,
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0),
    )
}
