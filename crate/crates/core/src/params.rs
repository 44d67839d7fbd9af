//! Parameter bundle of the end-to-end estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier in the birthday-estimate envelope `(1+delta)^(-2c) .. (1+delta)^(2c+2)`.
pub const C: u32 = 4;

/// Largest admissible failure-rate parameter.
pub const GAMMA0_MAX: f64 = 1.0 / 12.0;

/// Whether the collision-probability bounds apply at this `delta`, i.e.
/// `4 <= c <= 1 / (4 delta)`.
pub fn collision_bounds_apply(delta: f64) -> bool {
    C as f64 <= 1.0 / (4.0 * delta)
}

/// `(m, epsilon, gamma0)` plus everything derived from them.
///
/// The sketch stage runs at `delta = epsilon / (12 c m)` and the scheduling
/// stage at `meta_delta = epsilon / 3`; the two are never mixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub m: usize,
    pub epsilon: f64,
    pub gamma0: f64,
    /// Replaces the derived sketch delta when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sketch_delta_override: Option<f64>,
}

impl Params {
    pub fn new(m: usize, epsilon: f64, gamma0: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("machine count must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(gamma0 > 0.0 && gamma0 <= GAMMA0_MAX) {
            return Err(Error::Config(format!(
                "gamma0 must lie in (0, 1/12], got {gamma0}"
            )));
        }
        let params = Self {
            m,
            epsilon,
            gamma0,
            sketch_delta_override: None,
        };
        let delta = params.delta();
        if !collision_bounds_apply(delta) {
            return Err(Error::Config(format!(
                "c = {C} exceeds 1/(4 delta) = {}",
                1.0 / (4.0 * delta)
            )));
        }
        Ok(params)
    }

    /// Run the sketch stage at an explicit `delta` instead of
    /// `epsilon / (12 c m)`. The collision-bound guarantee may no longer hold;
    /// check [`collision_bounds_apply`].
    pub fn with_sketch_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Config(format!(
                "sketch delta must lie in (0, 1/2), got {delta}"
            )));
        }
        if !collision_bounds_apply(delta) {
            log::warn!("sketch delta {delta} exceeds 1/(4c); envelope guarantees do not apply");
        }
        self.sketch_delta_override = Some(delta);
        Ok(self)
    }

    pub fn c(&self) -> u32 {
        C
    }

    /// Sketch-stage delta.
    pub fn delta(&self) -> f64 {
        self.sketch_delta_override
            .unwrap_or(self.epsilon / (12.0 * C as f64 * self.m as f64))
    }

    pub fn meta_delta(&self) -> f64 {
        self.epsilon / 3.0
    }

    /// Number of largest jobs handed to the black-box solver, `ceil(m / meta_delta)`.
    pub fn h_meta(&self) -> usize {
        largest_job_count(self.m, self.meta_delta())
    }
}

/// `ceil(m / delta)`, guarding against `m / delta` landing a hair above an integer.
pub(crate) fn largest_job_count(m: usize, delta: f64) -> usize {
    let x = m as f64 / delta;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = Params::new(2, 0.3, 1.0 / 12.0).unwrap();
        assert_eq!(p.c(), 4);
        assert!((p.delta() - 0.3 / 96.0).abs() < 1e-15);
        assert!((p.meta_delta() - 0.1).abs() < 1e-15);
        assert_eq!(p.h_meta(), 20);
        assert!(p.delta() <= 1.0 / (4.0 * 4.0));
    }

    #[test]
    fn deterministic() {
        let a = Params::new(3, 0.5, 0.05).unwrap();
        let b = Params::new(3, 0.5, 0.05).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.delta(), b.delta());
        assert_eq!(a.h_meta(), b.h_meta());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Params::new(0, 0.5, 0.05).is_err());
        assert!(Params::new(2, 1.0, 0.05).is_err());
        assert!(Params::new(2, 0.0, 0.05).is_err());
        assert!(Params::new(2, 0.5, 0.2).is_err());
        assert!(Params::new(2, 0.5, 0.0).is_err());
    }

    #[test]
    fn override_keeps_meta_delta() {
        let p = Params::new(2, 0.5, 1.0 / 12.0)
            .unwrap()
            .with_sketch_delta(0.1)
            .unwrap();
        assert_eq!(p.delta(), 0.1);
        assert!((p.meta_delta() - 0.5 / 3.0).abs() < 1e-15);
        assert!(!collision_bounds_apply(0.1));
        assert!(collision_bounds_apply(1.0 / 16.0));
        assert!(p.with_sketch_delta(0.5).is_err());
    }

    #[test]
    fn h_meta_rounding() {
        assert_eq!(largest_job_count(2, 0.1), 20);
        assert_eq!(largest_job_count(3, 0.2 / 3.0), 45);
        assert_eq!(largest_job_count(1, 0.3), 4);
    }
}
