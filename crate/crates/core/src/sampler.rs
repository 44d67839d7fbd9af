//! Weighted random sampling oracle.
//!
//! Jobs sit at the leaves of a perfectly balanced binary tree whose internal
//! nodes store the total weight of their subtree. A draw walks from the root
//! to a leaf, picking a child at every level with a fresh uniform number
//! compared against the cumulative weight bracket, so a job is returned with
//! probability proportional to its processing time.
//!
//! Every draw is counted; the counter is the cost unit that the sublinear
//! algorithms are measured in.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Environment variable consulted for a default seed.
pub const SEED_ENV: &str = "SUBSKETCH_SEED";

/// Seed from `SUBSKETCH_SEED` when set and parseable.
pub fn seed_from_env() -> Option<u64> {
    std::env::var(SEED_ENV).ok()?.trim().parse().ok()
}

/// One weighted draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub job: usize,
    pub time: f64,
}

/// Source of weighted draws. The sketch algorithms only see jobs through
/// this trait.
pub trait WeightedSampler {
    fn sample_one(&mut self) -> Sample;

    fn draws_used(&self) -> u64;

    /// Full scan of the processing times. Only the non-sublinear fallback
    /// paths call this.
    fn scan(&self) -> Vec<f64>;

    fn sample_many(&mut self, k: usize) -> Result<Vec<Sample>> {
        if k == 0 {
            return Err(Error::Config("sample_many needs k >= 1".into()));
        }
        Ok((0..k).map(|_| self.sample_one()).collect())
    }
}

#[derive(Debug)]
struct Tree {
    /// Heap layout: node `i` has children `2i+1`, `2i+2`; leaves start at
    /// `leaf_base`. Padding leaves have weight 0.
    weights: Vec<f64>,
    times: Vec<f64>,
    leaf_base: usize,
    height: usize,
}

impl Tree {
    fn build(times: &[f64]) -> Self {
        let n = times.len();
        let capacity = n.next_power_of_two();
        let leaf_base = capacity - 1;
        let mut weights = vec![0.0; 2 * capacity - 1];
        weights[leaf_base..leaf_base + n].copy_from_slice(times);
        for i in (0..leaf_base).rev() {
            weights[i] = weights[2 * i + 1] + weights[2 * i + 2];
        }
        Self {
            weights,
            times: times.to_vec(),
            leaf_base,
            height: capacity.trailing_zeros() as usize + 1,
        }
    }
}

/// Aggregated-weight tree plus a seeded generator and a draw counter.
///
/// The tree is shared and immutable; each index owns its generator, so
/// independent trials use [`SamplerIndex::with_seed`] on one built tree.
#[derive(Debug)]
pub struct SamplerIndex {
    tree: Arc<Tree>,
    rng: ChaCha8Rng,
    draws: u64,
    visits: u64,
}

impl SamplerIndex {
    pub fn build(instance: &Instance, seed: u64) -> Result<Self> {
        Self::from_weights(instance.times(), seed)
    }

    pub fn from_weights(weights: &[f64], seed: u64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidProcessingTime { index, value });
        }
        if weights.len() > u32::MAX as usize {
            return Err(Error::Config("at most 2^32 - 1 jobs are supported".into()));
        }
        Ok(Self {
            tree: Arc::new(Tree::build(weights)),
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
            visits: 0,
        })
    }

    /// A fresh index over the same tree with its own generator and counters.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            tree: Arc::clone(&self.tree),
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
            visits: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tree.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.times.is_empty()
    }

    /// Nodes on a root-to-leaf path.
    pub fn height(&self) -> usize {
        self.tree.height
    }

    pub fn total_weight(&self) -> f64 {
        self.tree.weights[0]
    }

    /// Total tree nodes visited by all draws so far.
    pub fn nodes_visited(&self) -> u64 {
        self.visits
    }

    /// Checks every internal node against the sum of its children, within
    /// `rel_tol` relative error. Returns the number of internal nodes checked.
    pub fn audit(&self, rel_tol: f64) -> Result<usize> {
        let w = &self.tree.weights;
        for i in 0..self.tree.leaf_base {
            let sum = w[2 * i + 1] + w[2 * i + 2];
            if (w[i] - sum).abs() > rel_tol * w[i].abs().max(f64::MIN_POSITIVE) {
                return Err(Error::Config(format!(
                    "node {i} stores {} but its children sum to {sum}",
                    w[i]
                )));
            }
        }
        Ok(self.tree.leaf_base)
    }

    fn descend(&mut self) -> usize {
        let w = &self.tree.weights;
        let mut node = 0;
        let mut visited = 1;
        while node < self.tree.leaf_base {
            let left = 2 * node + 1;
            let r: f64 = self.rng.random();
            // Bracket test for the left child; ties within an ulp go left.
            node = if w[left] > 0.0 && r * w[node] <= w[left] * (1.0 + f64::EPSILON) {
                left
            } else {
                left + 1
            };
            visited += 1;
        }
        self.visits += visited;
        node - self.tree.leaf_base
    }
}

impl WeightedSampler for SamplerIndex {
    fn sample_one(&mut self) -> Sample {
        let job = self.descend();
        self.draws += 1;
        Sample {
            job,
            time: self.tree.times[job],
        }
    }

    fn draws_used(&self) -> u64 {
        self.draws
    }

    fn scan(&self) -> Vec<f64> {
        self.tree.times.clone()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Replays a fixed sequence of jobs, cycling when exhausted.
    pub struct Scripted {
        pub times: Vec<f64>,
        pub script: Vec<usize>,
        pub pos: usize,
        pub draws: u64,
    }

    impl Scripted {
        pub fn new(times: Vec<f64>, script: Vec<usize>) -> Self {
            Self {
                times,
                script,
                pos: 0,
                draws: 0,
            }
        }
    }

    impl WeightedSampler for Scripted {
        fn sample_one(&mut self) -> Sample {
            let job = self.script[self.pos % self.script.len()];
            self.pos += 1;
            self.draws += 1;
            Sample {
                job,
                time: self.times[job],
            }
        }

        fn draws_used(&self) -> u64 {
            self.draws
        }

        fn scan(&self) -> Vec<f64> {
            self.times.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi_square_test;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn singleton() {
        let mut s = SamplerIndex::from_weights(&[5.0], 1).unwrap();
        assert_eq!(s.total_weight(), 5.0);
        assert_eq!(s.height(), 1);
        for _ in 0..10 {
            assert_eq!(s.sample_one(), Sample { job: 0, time: 5.0 });
        }
        assert_eq!(s.nodes_visited(), 10);
        let many = s.sample_many(3).unwrap();
        assert!(many.iter().all(|x| x.job == 0));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            SamplerIndex::from_weights(&[], 0).unwrap_err(),
            Error::EmptyInstance
        );
        assert!(SamplerIndex::from_weights(&[1.0, -2.0], 0).is_err());
        assert!(SamplerIndex::from_weights(&[1.0, 0.0], 0).is_err());
    }

    #[test]
    fn root_weight_is_total() {
        let s = SamplerIndex::from_weights(&[1.0, 2.0, 3.0], 0).unwrap();
        assert_eq!(s.total_weight(), 6.0);
        assert_eq!(s.height(), 3);
    }

    #[test]
    fn draw_counter() {
        let mut s = SamplerIndex::from_weights(&[1.0, 2.0, 3.0], 0).unwrap();
        assert_eq!(s.draws_used(), 0);
        s.sample_many(7).unwrap();
        assert_eq!(s.draws_used(), 7);
        assert!(s.sample_many(0).is_err());
        assert_eq!(s.draws_used(), 7);
    }

    #[test]
    fn full_audit_large_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.001..1000.0)).collect();
        let s = SamplerIndex::from_weights(&w, 0).unwrap();
        assert_eq!(s.audit(1e-9).unwrap(), 131_071);
        let total: f64 = w.iter().sum();
        assert!((s.total_weight() - total).abs() <= 1e-9 * total);
        assert!(s.height() as f64 <= 2.0 * (w.len() as f64).log2() + 2.0);
    }

    #[test]
    fn equal_weights_are_balanced() {
        let mut s = SamplerIndex::from_weights(&[1.0, 1.0], 11).unwrap();
        let n = 100_000;
        let zeros = (0..n).filter(|_| s.sample_one().job == 0).count();
        let f = zeros as f64 / n as f64;
        assert!((0.49..=0.51).contains(&f), "frequency {f}");
    }

    #[test]
    fn chi_square_one_two_three() {
        let mut s = SamplerIndex::from_weights(&[1.0, 2.0, 3.0], 5).unwrap();
        let mut counts = [0u64; 3];
        for _ in 0..60_000 {
            counts[s.sample_one().job] += 1;
        }
        let outcome = chi_square_test(&counts, &[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0], 0.001);
        assert!(outcome.pass, "{outcome:?}");
    }

    #[test]
    fn successive_draws_uncorrelated() {
        let mut s = SamplerIndex::from_weights(&[1.0, 2.0, 3.0, 4.0, 5.0], 9).unwrap();
        let pairs: Vec<(f64, f64)> = (0..100_000)
            .map(|_| (s.sample_one().job as f64, s.sample_one().job as f64))
            .collect();
        let r = crate::stats::pearson(&pairs);
        assert!(r.abs() < 0.02, "r = {r}");
    }

    #[test]
    fn visits_bounded_by_height() {
        let w: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let mut s = SamplerIndex::from_weights(&w, 2).unwrap();
        for _ in 0..1000 {
            let before = s.nodes_visited();
            s.sample_one();
            assert!(s.nodes_visited() - before <= s.height() as u64);
        }
        assert!(s.height() as f64 <= 2.0 * 1000f64.log2() + 2.0);
    }

    #[test]
    fn with_seed_shares_tree() {
        let a = SamplerIndex::from_weights(&[1.0, 2.0, 3.0], 1).unwrap();
        let mut b = a.with_seed(4);
        let mut c = a.with_seed(4);
        let xs: Vec<usize> = (0..50).map(|_| b.sample_one().job).collect();
        let ys: Vec<usize> = (0..50).map(|_| c.sample_one().job).collect();
        assert_eq!(xs, ys);
        assert_eq!(b.draws_used(), 50);
    }

    proptest! {
        #[test]
        fn same_seed_same_sequence(w in prop::collection::vec(0.01f64..100.0, 1..64), seed: u64) {
            let mut a = SamplerIndex::from_weights(&w, seed).unwrap();
            let mut b = SamplerIndex::from_weights(&w, seed).unwrap();
            for _ in 0..32 {
                prop_assert_eq!(a.sample_one(), b.sample_one());
            }
        }

        #[test]
        fn subtree_sums_hold(w in prop::collection::vec(1e-6f64..1e6, 1..300)) {
            let s = SamplerIndex::from_weights(&w, 0).unwrap();
            prop_assert!(s.audit(1e-9).is_ok());
            prop_assert!(s.height() as f64 <= 2.0 * (w.len() as f64).log2() + 2.0);
        }
    }
}
