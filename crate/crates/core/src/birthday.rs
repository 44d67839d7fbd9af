//! Birthday-paradox count estimation from grouped samples.
//!
//! The samples of one interval are cut into equal groups. For a prefix
//! length `l`, `g_l` is the number of groups whose first `ceil(l)` samples
//! are pairwise distinct jobs. Once `g_l` drops to a `1/sqrt(e)` fraction of
//! the groups, about `l^2` jobs live in the interval.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of the longest all-distinct prefix of each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupProfile {
    prefix: Vec<usize>,
    group_size: usize,
}

impl GroupProfile {
    /// Splits `samples` into `groups` consecutive groups of
    /// `samples.len() / groups` samples each; leftovers are dropped.
    pub fn by_count(samples: &[usize], groups: usize) -> Self {
        assert!(groups >= 1);
        Self::by_size(samples, samples.len() / groups, groups)
    }

    /// Consecutive groups of `size` samples, as many full groups as fit,
    /// but at most `max_groups`.
    pub fn by_size(samples: &[usize], size: usize, max_groups: usize) -> Self {
        let mut seen = HashSet::with_capacity(size);
        let prefix = if size == 0 {
            Vec::new()
        } else {
            samples
                .chunks_exact(size)
                .take(max_groups)
                .map(|group| {
                    seen.clear();
                    group.iter().take_while(|&&j| seen.insert(j)).count()
                })
                .collect()
        };
        Self {
            prefix,
            group_size: size,
        }
    }

    pub fn groups(&self) -> usize {
        self.prefix.len()
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Number among the first `first` groups whose first `len` samples are
    /// distinct.
    pub fn distinct_groups(&self, len: usize, first: usize) -> usize {
        debug_assert!(len <= self.group_size);
        self.prefix.iter().take(first).filter(|&&p| p >= len).count()
    }
}

/// Prefix length used for a real grid point `l`.
pub fn prefix_len(l: f64) -> usize {
    // (1+delta)^i can land a hair above an integer
    let r = l.round();
    if (l - r).abs() <= 1e-9 * l {
        r as usize
    } else {
        l.ceil() as usize
    }
}

/// Count estimate `l^2` rounded to the nearest integer, at least 1.
pub fn count_from_grid(l: f64) -> u64 {
    (l * l).round().max(1.0) as u64
}

/// Outcome of the known-n estimator on one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthdayEstimate {
    pub count: u64,
    /// Grid point at which the criterion fired, or the cap if it never did.
    pub l: f64,
    pub groups: usize,
    pub saturated: bool,
}

/// Known-n estimator: groups of `ceil(h0)` samples, grid
/// `l = (1+delta)^i <= h0`, stop at the first `l` with `g_l <= u/sqrt(e)`.
/// Returns `round(h0^2)` flagged as saturated if the criterion never fires.
pub fn birthday_estimate(samples: &[usize], delta: f64, h0: f64) -> Result<BirthdayEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            what: "birthday delta (0, 1)",
            value: delta,
        });
    }
    if !(h0 >= 1.0) {
        return Err(Error::Domain {
            what: "birthday group size",
            value: h0,
        });
    }
    let size = h0.ceil() as usize;
    let profile = GroupProfile::by_size(samples, size, usize::MAX);
    let u = profile.groups();
    if u == 0 {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            needed: size,
        });
    }
    let threshold = u as f64 / std::f64::consts::E.sqrt();
    let mut l = 1.0f64;
    let mut i = 0;
    while l <= h0 * (1.0 + 1e-12) {
        let len = prefix_len(l).min(size);
        if profile.distinct_groups(len, u) as f64 <= threshold {
            return Ok(BirthdayEstimate {
                count: count_from_grid(l),
                l,
                groups: u,
                saturated: false,
            });
        }
        i += 1;
        l = (1.0 + delta).powi(i);
    }
    Ok(BirthdayEstimate {
        count: count_from_grid(h0),
        l: h0,
        groups: u,
        saturated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Prefix distinctness by pairwise comparison.
    fn brute_prefix(group: &[usize]) -> usize {
        for end in 1..=group.len() {
            for a in 0..end {
                for b in a + 1..end {
                    if group[a] == group[b] {
                        return end - 1;
                    }
                }
            }
        }
        group.len()
    }

    #[test]
    fn profile_matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let len = rng.random_range(1..80);
            let pool = rng.random_range(1..30);
            let s: Vec<usize> = (0..len).map(|_| rng.random_range(0..pool)).collect();
            let size = rng.random_range(1..=len);
            let prof = GroupProfile::by_size(&s, size, usize::MAX);
            assert_eq!(prof.groups(), len / size);
            for (g, chunk) in s.chunks_exact(size).enumerate() {
                let expect = brute_prefix(chunk);
                for l in 1..=size {
                    let got = prof.distinct_groups(l, g + 1) - prof.distinct_groups(l, g);
                    assert_eq!(got, usize::from(expect >= l));
                }
            }
        }
    }

    #[test]
    fn single_job_collides_at_second_grid_point() {
        let s = vec![7usize; 300];
        let e = birthday_estimate(&s, 0.1, 3.0 * 100f64.sqrt()).unwrap();
        assert!(!e.saturated);
        assert!((e.l - 1.1).abs() < 1e-12);
        assert_eq!(e.count, 1);
        assert_eq!(e.groups, 10);
    }

    #[test]
    fn all_distinct_saturates() {
        let s: Vec<usize> = (0..120).collect();
        let n = 100.0f64;
        let e = birthday_estimate(&s, 0.1, 3.0 * n.sqrt()).unwrap();
        assert!(e.saturated);
        assert_eq!(e.count, 900);
        assert_eq!(e.groups, 4);
    }

    #[test]
    fn short_sequences_are_rejected() {
        assert_eq!(
            birthday_estimate(&[1, 2, 3], 0.1, 30.0),
            Err(Error::InsufficientSamples { got: 3, needed: 30 })
        );
    }

    #[test]
    fn partial_group_is_ignored() {
        // 2 full groups of 4 and a trailing partial one
        let s = [1, 1, 1, 1, 2, 2, 2, 2, 3, 4, 5];
        let p = GroupProfile::by_size(&s, 4, usize::MAX);
        assert_eq!(p.groups(), 2);
        assert_eq!(p.distinct_groups(1, 2), 2);
        assert_eq!(p.distinct_groups(2, 2), 0);
        let q = GroupProfile::by_count(&s, 3);
        assert_eq!(q.group_size(), 3);
        assert_eq!(q.groups(), 3);
    }

    #[test]
    fn prefix_rounding() {
        assert_eq!(prefix_len(1.0), 1);
        assert_eq!(prefix_len(1.1), 2);
        assert_eq!(prefix_len(1.1f64.powi(8)), 3);
        assert_eq!(prefix_len(2.0000000000000004), 2);
        assert_eq!(count_from_grid(1.1), 1);
        assert_eq!(count_from_grid(31.0), 961);
    }

    #[test]
    fn uniform_population_estimate_is_in_envelope() {
        let n = 2000usize;
        let delta = 0.1;
        let h0 = 3.0 * (n as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let samples: Vec<usize> = (0..h0.ceil() as usize * 400)
            .map(|_| rng.random_range(0..n))
            .collect();
        let e = birthday_estimate(&samples, delta, h0).unwrap();
        let lo = n as f64 * (1.0 + delta).powi(-2 * C as i32);
        let hi = n as f64 * (1.0 + delta).powi(2 * C as i32 + 2);
        assert!((lo..=hi).contains(&(e.count as f64)), "{e:?}");
    }
}
