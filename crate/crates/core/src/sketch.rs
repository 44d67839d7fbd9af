//! Sketch instances, sketch schedules and concrete schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::interval::IntervalScheme;
use crate::scheduler::oracle;

/// Estimated count of jobs in one interval, with the interval's rounded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchEntry {
    pub interval: usize,
    pub count: u64,
    pub time: f64,
    /// Count came from the birthday estimator's no-collision fallback.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub saturated: bool,
}

/// Compressed instance: `<count, time>` per surviving interval, ordered by
/// strictly decreasing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchInstance {
    scheme: IntervalScheme,
    entries: Vec<SketchEntry>,
}

impl SketchInstance {
    /// Builds a sketch from `(interval, count)` pairs. Times are derived from
    /// the scheme, so they always match `anchor (1-delta)^(k-1)`.
    pub fn from_counts(
        scheme: IntervalScheme,
        counts: impl IntoIterator<Item = (usize, u64)>,
    ) -> Result<Self> {
        let entries = counts
            .into_iter()
            .map(|(interval, count)| SketchEntry {
                interval,
                count,
                time: if interval >= 1 { scheme.upper(interval) } else { f64::NAN },
                saturated: false,
            })
            .collect();
        Self::new(scheme, entries)
    }

    pub fn new(scheme: IntervalScheme, mut entries: Vec<SketchEntry>) -> Result<Self> {
        entries.sort_by_key(|e| e.interval);
        for pair in entries.windows(2) {
            if pair[0].interval == pair[1].interval {
                return Err(Error::Config(format!(
                    "interval {} appears twice in the sketch",
                    pair[0].interval
                )));
            }
        }
        for e in &entries {
            if e.interval == 0 {
                return Err(Error::Config("intervals are numbered from 1".into()));
            }
            if e.count == 0 {
                return Err(Error::Config(format!("interval {} has count 0", e.interval)));
            }
            if e.time != scheme.upper(e.interval) {
                return Err(Error::Config(format!(
                    "interval {} carries time {} instead of {}",
                    e.interval,
                    e.time,
                    scheme.upper(e.interval)
                )));
            }
        }
        Ok(Self { scheme, entries })
    }

    pub fn empty(scheme: IntervalScheme) -> Self {
        Self {
            scheme,
            entries: Vec::new(),
        }
    }

    pub fn scheme(&self) -> &IntervalScheme {
        &self.scheme
    }

    pub fn entries(&self) -> &[SketchEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_jobs(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn total_time(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc + e.count as f64 * e.time)
    }

    pub fn count_of(&self, interval: usize) -> Option<u64> {
        self.entries
            .binary_search_by_key(&interval, |e| e.interval)
            .ok()
            .map(|i| self.entries[i].count)
    }

    /// The sketch's jobs in non-increasing order of time, at most `limit` of them.
    pub fn largest_jobs(&self, limit: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for e in &self.entries {
            let take = (limit - out.len()).min(e.count as usize);
            out.extend(std::iter::repeat_n(e.time, take));
            if out.len() == limit {
                break;
            }
        }
        out
    }

    /// Every sketch job as an explicit time, largest first.
    pub fn expand(&self) -> Vec<f64> {
        self.largest_jobs(self.total_jobs() as usize)
    }
}

/// Quality triple of a sketch against its instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchQuality {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl SketchQuality {
    pub fn new(alpha: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let ok = |x: f64| (0.0..1.0).contains(&x);
        if ok(alpha) && ok(beta1) && ok(beta2) {
            Ok(Self { alpha, beta1, beta2 })
        } else {
            Err(Error::QualityViolation { alpha, beta1, beta2 })
        }
    }

    /// Makespan factor of an expanded sketch schedule,
    /// `(1+beta1)(1 + alpha/(1-alpha) m) + beta2`.
    pub fn expansion_factor(&self, m: usize) -> f64 {
        (1.0 + self.beta1) * (1.0 + self.alpha / (1.0 - self.alpha) * m as f64) + self.beta2
    }
}

/// Measures the smallest `(alpha, beta1, beta2)` for which `sketch` is a
/// quality sketch of `instance`.
///
/// `exact_opt` is the instance's optimal makespan; the sketch's own optimum
/// is computed with the exact oracle, so this is for small instances only.
pub fn validate_sketch_quality(
    instance: &Instance,
    sketch: &SketchInstance,
    m: usize,
    exact_opt: f64,
) -> Result<SketchQuality> {
    let scheme = sketch.scheme();
    let mut true_counts = std::collections::BTreeMap::<usize, u64>::new();
    let mut discarded = 0.0;
    for &p in instance.times() {
        match scheme.locate(p) {
            Some(k) if sketch.count_of(k).is_some() => *true_counts.entry(k).or_default() += 1,
            _ => discarded += p,
        }
    }

    let mut alpha: f64 = 0.0;
    for e in sketch.entries() {
        let n_k = true_counts.get(&e.interval).copied().unwrap_or(0);
        let dev = if n_k == 0 {
            f64::INFINITY
        } else {
            (e.count as f64 - n_k as f64).abs() / n_k as f64
        };
        alpha = alpha.max(dev);
    }

    let sketch_opt = if sketch.is_empty() {
        0.0
    } else {
        oracle::exact_opt(&sketch.expand(), m)?
    };
    let beta1 = (sketch_opt / exact_opt - 1.0).abs();
    let beta2 = discarded / exact_opt;
    SketchQuality::new(alpha, beta1, beta2)
}

/// Per-machine, per-interval job counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchSchedule {
    m: usize,
    /// `counts[i][j]`: jobs of sketch entry `j` on machine `i`.
    counts: Vec<Vec<u64>>,
    /// Interval of each sketch entry.
    intervals: Vec<usize>,
    times: Vec<f64>,
}

impl SketchSchedule {
    pub fn new(sketch: &SketchInstance, counts: Vec<Vec<u64>>) -> Result<Self> {
        let m = counts.len();
        if m == 0 {
            return Err(Error::Config("a sketch schedule needs at least one machine".into()));
        }
        for (j, e) in sketch.entries().iter().enumerate() {
            let mut column = 0;
            for row in &counts {
                if row.len() != sketch.len() {
                    return Err(Error::Config("sketch schedule row width mismatch".into()));
                }
                column += row[j];
            }
            if column != e.count {
                return Err(Error::Config(format!(
                    "interval {} places {column} jobs, sketch has {}",
                    e.interval, e.count
                )));
            }
        }
        Ok(Self {
            m,
            counts,
            intervals: sketch.entries().iter().map(|e| e.interval).collect(),
            times: sketch.entries().iter().map(|e| e.time).collect(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self, machine: usize, entry: usize) -> u64 {
        self.counts[machine][entry]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn intervals(&self) -> &[usize] {
        &self.intervals
    }

    pub fn column_sum(&self, entry: usize) -> u64 {
        self.counts.iter().map(|row| row[entry]).sum()
    }

    pub fn loads(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| row.iter().zip(&self.times).fold(0.0, |acc, (&c, &t)| acc + c as f64 * t))
            .collect()
    }

    pub fn makespan(&self) -> f64 {
        self.loads().into_iter().fold(0.0, f64::max)
    }

    /// Sparse `(machine, interval, count)` triples with nonzero count.
    pub fn cells(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    out.push((i, self.intervals[j], c));
                }
            }
        }
        out
    }
}

/// Job-to-machine assignment, machines numbered from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteSchedule {
    m: usize,
    assignment: Vec<usize>,
    makespan: f64,
}

impl ConcreteSchedule {
    pub fn new(times: &[f64], m: usize, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != times.len() {
            return Err(Error::Config("assignment length differs from job count".into()));
        }
        if let Some(&bad) = assignment.iter().find(|&&i| i >= m) {
            return Err(Error::Config(format!("machine {bad} out of range for m = {m}")));
        }
        let makespan = machine_loads(times, m, &assignment)
            .into_iter()
            .fold(0.0, f64::max);
        Ok(Self {
            m,
            assignment,
            makespan,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn makespan(&self) -> f64 {
        self.makespan
    }
}

pub fn machine_loads(times: &[f64], m: usize, assignment: &[usize]) -> Vec<f64> {
    let mut loads = vec![0.0; m];
    for (&p, &i) in times.iter().zip(assignment) {
        loads[i] += p;
    }
    loads
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme() -> IntervalScheme {
        IntervalScheme::new(10.0, 0.1).unwrap()
    }

    #[test]
    fn times_follow_the_scheme() {
        let s = SketchInstance::from_counts(scheme(), [(3, 2), (1, 5)]).unwrap();
        assert_eq!(s.entries()[0].interval, 1);
        assert_eq!(s.entries()[0].time, 10.0);
        for e in s.entries() {
            let k = s.scheme().interval_index(e.time).unwrap();
            assert_eq!(k, e.interval);
            assert_eq!(s.scheme().upper(k), e.time);
        }
        assert!(s.entries()[0].time > s.entries()[1].time);
        assert_eq!(s.total_jobs(), 7);
    }

    #[test]
    fn rejects_zero_counts_and_duplicates() {
        assert!(SketchInstance::from_counts(scheme(), [(1, 0)]).is_err());
        assert!(SketchInstance::from_counts(scheme(), [(1, 1), (1, 2)]).is_err());
        let mut bad = SketchInstance::from_counts(scheme(), [(2, 1)]).unwrap().entries()[0];
        bad.time *= 1.01;
        assert!(SketchInstance::new(scheme(), vec![bad]).is_err());
    }

    #[test]
    fn largest_jobs_prefix() {
        let s = SketchInstance::from_counts(scheme(), [(1, 2), (2, 3)]).unwrap();
        assert_eq!(s.largest_jobs(3), vec![10.0, 10.0, scheme().upper(2)]);
        assert_eq!(s.expand().len(), 5);
        assert_eq!(s.largest_jobs(0), Vec::<f64>::new());
    }

    #[test]
    fn exact_sketch_quality_is_zero() {
        let inst = Instance::new(vec![10.0, 10.0, 9.0, 9.0]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 2), (2, 2)]).unwrap();
        let opt = oracle::exact_opt(inst.times(), 2).unwrap();
        let q = validate_sketch_quality(&inst, &sk, 2, opt).unwrap();
        assert_eq!(q.alpha, 0.0);
        assert_eq!(q.beta2, 0.0);
        assert!(q.beta1 < 1e-9);
    }

    #[test]
    fn quality_counts_discards_and_count_errors() {
        let inst = Instance::new(vec![10.0, 10.0, 9.0, 1.0]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 3), (2, 1)]).unwrap();
        let opt = oracle::exact_opt(inst.times(), 2).unwrap();
        assert_eq!(opt, 19.0);
        let q = validate_sketch_quality(&inst, &sk, 2, opt).unwrap();
        assert!((q.alpha - 0.5).abs() < 1e-12);
        assert!((q.beta2 - 1.0 / 19.0).abs() < 1e-12);
        // sketch opt: jobs 10,10,10,9 on 2 machines -> 20
        assert!((q.beta1 - (20.0 / 19.0 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn phantom_interval_violates() {
        let inst = Instance::new(vec![10.0]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 1), (5, 1)]).unwrap();
        assert!(matches!(
            validate_sketch_quality(&inst, &sk, 1, 10.0),
            Err(Error::QualityViolation { .. })
        ));
    }

    #[test]
    fn sketch_schedule_conserves_columns() {
        let sk = SketchInstance::from_counts(scheme(), [(1, 3), (2, 1)]).unwrap();
        assert!(SketchSchedule::new(&sk, vec![vec![2, 1], vec![1, 0]]).is_ok());
        assert!(SketchSchedule::new(&sk, vec![vec![2, 1], vec![0, 0]]).is_err());
        let ss = SketchSchedule::new(&sk, vec![vec![2, 0], vec![1, 1]]).unwrap();
        assert_eq!(ss.column_sum(0), 3);
        assert_eq!(ss.makespan(), 20.0);
        assert_eq!(ss.cells(), vec![(0, 1, 2), (1, 1, 1), (1, 2, 1)]);
    }

    #[test]
    fn concrete_schedule_recomputes_makespan() {
        let s = ConcreteSchedule::new(&[3.0, 2.0, 2.0], 2, vec![0, 1, 1]).unwrap();
        assert_eq!(s.makespan(), 4.0);
        assert!(ConcreteSchedule::new(&[3.0], 2, vec![2]).is_err());
    }
}
