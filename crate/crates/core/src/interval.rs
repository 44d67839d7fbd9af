//! Geometric processing-time intervals.
//!
//! Interval `k >= 1` is `(anchor (1-delta)^k, anchor (1-delta)^(k-1)]`. Every
//! boundary is evaluated in log space from `(k-1) ln(1-delta)` so that the
//! index of a time and the representative time of an index agree exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the log-space boundary test, relative to the fractional index.
/// A time within this of a boundary counts as lying on it.
const BOUNDARY_TOL: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalScheme {
    anchor: f64,
    delta: f64,
}

impl IntervalScheme {
    pub fn new(anchor: f64, delta: f64) -> Result<Self> {
        if !(anchor.is_finite() && anchor > 0.0) {
            return Err(Error::Domain {
                what: "interval anchor",
                value: anchor,
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain {
                what: "interval delta (0, 1)",
                value: delta,
            });
        }
        Ok(Self { anchor, delta })
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `-ln(1 - delta)`.
    fn step(&self) -> f64 {
        -(-self.delta).ln_1p()
    }

    /// Fractional position `ln(anchor / p) / -ln(1 - delta)`.
    fn position(&self, p: f64) -> f64 {
        (self.anchor / p).ln() / self.step()
    }

    /// The unique `k` with `anchor (1-delta)^k < p <= anchor (1-delta)^(k-1)`.
    pub fn interval_index(&self, p: f64) -> Result<usize> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain {
                what: "processing time",
                value: p,
            });
        }
        self.locate(p).ok_or(Error::Domain {
            what: "processing time above the interval anchor",
            value: p,
        })
    }

    /// Like [`interval_index`](Self::interval_index) but `None` for times
    /// above the anchor.
    pub fn locate(&self, p: f64) -> Option<usize> {
        let x = self.position(p);
        let tol = BOUNDARY_TOL * x.abs().max(1.0);
        if x < -tol {
            return None;
        }
        let k = (x.max(0.0) + tol).floor() as usize + 1;
        Some(k)
    }

    /// Representative (rounded-up) time of interval `k`: `anchor (1-delta)^(k-1)`.
    pub fn upper(&self, k: usize) -> f64 {
        assert!(k >= 1, "intervals are numbered from 1");
        self.anchor * (-((k - 1) as f64) * self.step()).exp()
    }

    /// Lower (open) end of interval `k`.
    pub fn lower(&self, k: usize) -> f64 {
        self.upper(k + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Boundaries by repeated multiplication, the route the log-space
    /// evaluation replaces.
    fn linear_scan(anchor: f64, delta: f64, p: f64) -> usize {
        let mut hi = anchor;
        let mut k = 1;
        loop {
            let lo = hi * (1.0 - delta);
            if lo < p && p <= hi {
                return k;
            }
            hi = lo;
            k += 1;
        }
    }

    #[test]
    fn anchor_is_interval_one() {
        let s = IntervalScheme::new(100.0, 0.5).unwrap();
        assert_eq!(s.interval_index(100.0).unwrap(), 1);
        assert_eq!(s.interval_index(30.0).unwrap(), 2);
        assert_eq!(s.interval_index(50.0).unwrap(), 2);
        assert_eq!(s.interval_index(50.000001).unwrap(), 1);
        assert_eq!(s.interval_index(25.0).unwrap(), 3);
    }

    #[test]
    fn domain_errors() {
        let s = IntervalScheme::new(100.0, 0.1).unwrap();
        assert!(s.interval_index(100.5).is_err());
        assert!(s.interval_index(0.0).is_err());
        assert!(s.interval_index(-1.0).is_err());
        assert_eq!(s.locate(101.0), None);
        assert!(IntervalScheme::new(1.0, 1.0).is_err());
        assert!(IntervalScheme::new(0.0, 0.1).is_err());
    }

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let delta = rng.random_range(0.001..0.49);
            let anchor = rng.random_range(0.5..1000.0);
            let p = anchor * rng.random_range(1e-4..=1.0f64);
            let s = IntervalScheme::new(anchor, delta).unwrap();
            assert_eq!(
                s.interval_index(p).unwrap(),
                linear_scan(anchor, delta, p),
                "anchor={anchor} delta={delta} p={p}"
            );
        }
    }

    #[test]
    fn boundaries_go_to_the_higher_interval() {
        for &delta in &[0.01, 0.05, 0.1, 0.3] {
            let s = IntervalScheme::new(7.5, delta).unwrap();
            for k in 1..400 {
                assert_eq!(s.interval_index(s.upper(k)).unwrap(), k);
            }
        }
    }

    proptest! {
        #[test]
        fn monotone(anchor in 0.1f64..1e6, delta in 0.001f64..0.49,
                    a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
            let s = IntervalScheme::new(anchor, delta).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.interval_index(hi * anchor).unwrap()
                <= s.interval_index(lo * anchor).unwrap());
        }

        #[test]
        fn contains_its_member(anchor in 0.1f64..1e6, delta in 0.001f64..0.49,
                               frac in 1e-9f64..1.0) {
            let s = IntervalScheme::new(anchor, delta).unwrap();
            let p = frac * anchor;
            let k = s.interval_index(p).unwrap();
            let rel = 1e-12;
            prop_assert!(p <= s.upper(k) * (1.0 + rel));
            prop_assert!(p > s.lower(k) * (1.0 - rel));
        }
    }
}
