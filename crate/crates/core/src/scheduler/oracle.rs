//! Exact optimal makespan for small instances. Ground truth for tests.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Exhaustive search is used while `m^n` stays below this.
pub const EXHAUSTIVE_LIMIT: f64 = 1e8;

/// Largest total processing time the integral load-set DP accepts.
pub const DP_TOTAL_LIMIT: f64 = 4e6;

const DP_STATE_LIMIT: usize = 2_000_000;

/// Minimal makespan of `jobs` on `m` identical machines.
///
/// Exhaustive assignment enumeration when `m^n <= 1e8`; otherwise a load-set
/// dynamic program when every time is an integer and the total is small.
pub fn exact_opt(jobs: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Config("machine count must be at least 1".into()));
    }
    if jobs.is_empty() {
        return Ok(0.0);
    }
    let p_max = jobs.iter().copied().fold(0.0, f64::max);
    if m == 1 {
        return Ok(jobs.iter().sum());
    }
    if m >= jobs.len() {
        return Ok(p_max);
    }
    if (m as f64).powi(jobs.len() as i32) <= EXHAUSTIVE_LIMIT {
        return Ok(exhaustive(jobs, m));
    }
    let total: f64 = jobs.iter().sum();
    if jobs.iter().all(|p| p.fract() == 0.0) && total <= DP_TOTAL_LIMIT {
        return if m == 2 {
            Ok(two_machine_subset_sum(jobs, total))
        } else {
            load_set_dp(jobs, m)
        };
    }
    Err(Error::OracleScale(format!(
        "{} jobs on {m} machines: neither exhaustive nor integral DP applies",
        jobs.len()
    )))
}

/// Every assignment up to relabelling of machines: job `j` may open at most
/// one new machine.
fn exhaustive(jobs: &[f64], m: usize) -> f64 {
    fn go(jobs: &[f64], loads: &mut [f64], used: usize, best: &mut f64) {
        let Some((&p, rest)) = jobs.split_first() else {
            let span = loads.iter().copied().fold(0.0, f64::max);
            *best = best.min(span);
            return;
        };
        let open = (used + 1).min(loads.len());
        for i in 0..open {
            loads[i] += p;
            go(rest, loads, used.max(i + 1), best);
            loads[i] -= p;
        }
    }
    let mut loads = vec![0.0; m];
    let mut best = f64::INFINITY;
    go(jobs, &mut loads, 0, &mut best);
    best
}

fn two_machine_subset_sum(jobs: &[f64], total: f64) -> f64 {
    let total = total as usize;
    let half = total / 2;
    let mut reach = vec![false; half + 1];
    reach[0] = true;
    for &p in jobs {
        let p = p as usize;
        for s in (p..=half).rev() {
            if reach[s - p] {
                reach[s] = true;
            }
        }
    }
    let best = (0..=half).rev().find(|&s| reach[s]).unwrap_or(0);
    (total - best) as f64
}

fn load_set_dp(jobs: &[f64], m: usize) -> Result<f64> {
    let mut states: HashSet<Vec<u64>> = HashSet::new();
    states.insert(vec![0; m]);
    for &p in jobs {
        let p = p as u64;
        let mut next = HashSet::with_capacity(states.len() * 2);
        for s in &states {
            let mut seen = HashSet::new();
            for i in 0..m {
                if !seen.insert(s[i]) {
                    continue;
                }
                let mut t = s.clone();
                t[i] += p;
                t.sort_unstable();
                next.insert(t);
            }
        }
        if next.len() > DP_STATE_LIMIT {
            return Err(Error::OracleScale(format!(
                "load-set DP exceeded {DP_STATE_LIMIT} states"
            )));
        }
        states = next;
    }
    Ok(states
        .iter()
        .map(|s| *s.iter().max().unwrap())
        .min()
        .unwrap() as f64)
}

/// Minimal makespan of a multiset given as `(time, count)` pairs.
///
/// Handles `m = 2` with few distinct times and large counts by enumerating
/// how many jobs of each type go to the first machine; the count of the
/// last type is then chosen in closed form. Other cases fall back to
/// [`exact_opt`] on the expanded list.
pub fn exact_opt_grouped(types: &[(f64, u64)], m: usize) -> Result<f64> {
    let types: Vec<(f64, u64)> = types.iter().copied().filter(|t| t.1 > 0).collect();
    let jobs: u64 = types.iter().map(|t| t.1).sum();
    if jobs == 0 {
        return Ok(0.0);
    }
    let total: f64 = types.iter().map(|&(p, c)| p * c as f64).sum();
    let p_max = types.iter().map(|t| t.0).fold(0.0, f64::max);
    if m == 1 {
        return Ok(total);
    }
    if m as u64 >= jobs {
        return Ok(p_max);
    }
    if m != 2 {
        let expanded: Vec<f64> = types
            .iter()
            .flat_map(|&(p, c)| std::iter::repeat_n(p, c as usize))
            .collect();
        return exact_opt(&expanded, m);
    }
    let (last, head) = types.split_last().unwrap();
    let combos: f64 = head.iter().map(|t| (t.1 + 1) as f64).product();
    if combos > EXHAUSTIVE_LIMIT {
        return Err(Error::OracleScale(format!(
            "{combos:.0} count combinations exceed the grouped oracle's limit"
        )));
    }
    let mut best = f64::INFINITY;
    let mut counts = vec![0u64; head.len()];
    loop {
        let load: f64 = head.iter().zip(&counts).map(|(t, &c)| t.0 * c as f64).sum();
        let (p, cap) = *last;
        let ideal = ((total / 2.0 - load) / p).floor().clamp(0.0, cap as f64) as u64;
        for c in [ideal, (ideal + 1).min(cap)] {
            let first = load + p * c as f64;
            best = best.min(first.max(total - first));
        }
        // odometer over the head counts
        let mut pos = 0;
        loop {
            if pos == head.len() {
                return Ok(best);
            }
            if counts[pos] < head[pos].1 {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}
