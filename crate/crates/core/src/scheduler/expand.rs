//! Turning a sketch schedule into an assignment of the real jobs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sketch::{ConcreteSchedule, SketchInstance, SketchSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub schedule: ConcreteSchedule,
    /// Real jobs beyond their interval's sketch count.
    pub surplus_jobs: usize,
    /// Real jobs whose interval is absent from the sketch.
    pub unsketched_jobs: usize,
}

/// Assigns every job of `instance` following `sketch_schedule`.
///
/// Within an interval, jobs take the sketch slots machine by machine.
/// Surplus jobs go to the machine holding the most slots of that interval,
/// lowest index on ties. Jobs from intervals the sketch does not list go to
/// machine 0.
pub fn expand_schedule(
    instance: &Instance,
    sketch: &SketchInstance,
    sketch_schedule: &SketchSchedule,
) -> Result<Expansion> {
    let m = sketch_schedule.m();
    if sketch_schedule.intervals() != sketch.entries().iter().map(|e| e.interval).collect::<Vec<_>>() {
        return Err(Error::Config("sketch schedule does not match the sketch".into()));
    }
    let t = sketch.len();
    // per entry: next machine with free slots and slots left on it
    let mut cursor = vec![0usize; t];
    let mut left: Vec<u64> = (0..t).map(|j| sketch_schedule.count(0, j)).collect();
    let heaviest: Vec<usize> = (0..t)
        .map(|j| {
            (0..m)
                .max_by(|&a, &b| {
                    sketch_schedule
                        .count(a, j)
                        .cmp(&sketch_schedule.count(b, j))
                        .then(b.cmp(&a))
                })
                .unwrap()
        })
        .collect();

    let scheme = sketch.scheme();
    let mut assignment = Vec::with_capacity(instance.n());
    let (mut surplus, mut unsketched) = (0, 0);
    for &p in instance.times() {
        let entry = scheme
            .locate(p)
            .and_then(|k| sketch.entries().binary_search_by_key(&k, |e| e.interval).ok());
        let Some(j) = entry else {
            unsketched += 1;
            assignment.push(0);
            continue;
        };
        while left[j] == 0 && cursor[j] + 1 < m {
            cursor[j] += 1;
            left[j] = sketch_schedule.count(cursor[j], j);
        }
        if left[j] > 0 {
            left[j] -= 1;
            assignment.push(cursor[j]);
        } else {
            surplus += 1;
            assignment.push(heaviest[j]);
        }
    }
    Ok(Expansion {
        schedule: ConcreteSchedule::new(instance.times(), m, assignment)?,
        surplus_jobs: surplus,
        unsketched_jobs: unsketched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalScheme;
    use crate::scheduler::meta::meta_sketch_schedule;
    use crate::scheduler::oracle::exact_opt;
    use crate::scheduler::solver::SolverStrategy;
    use crate::sketch::validate_sketch_quality;

    fn scheme() -> IntervalScheme {
        IntervalScheme::new(10.0, 0.1).unwrap()
    }

    #[test]
    fn exact_sketch_reproduces_slots() {
        let inst = Instance::new(vec![10.0, 10.0, 10.0, 9.0]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 3), (2, 1)]).unwrap();
        let ss = SketchSchedule::new(&sk, vec![vec![1, 1], vec![2, 0]]).unwrap();
        let e = expand_schedule(&inst, &sk, &ss).unwrap();
        assert_eq!(e.schedule.assignment(), &[0, 1, 1, 0]);
        assert_eq!(e.surplus_jobs, 0);
        assert_eq!(e.unsketched_jobs, 0);
        assert_eq!(e.schedule.makespan(), 20.0);
    }

    #[test]
    fn surplus_goes_to_the_heaviest_machine() {
        let inst = Instance::new(vec![10.0, 10.0, 10.0, 10.0]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 3)]).unwrap();
        let ss = SketchSchedule::new(&sk, vec![vec![1], vec![2]]).unwrap();
        let e = expand_schedule(&inst, &sk, &ss).unwrap();
        assert_eq!(e.schedule.assignment(), &[0, 1, 1, 1]);
        assert_eq!(e.surplus_jobs, 1);
    }

    #[test]
    fn ties_and_unsketched_jobs_use_machine_zero() {
        let inst = Instance::new(vec![10.0, 10.0, 10.0, 0.5]).unwrap();
        let sk = SketchInstance::from_counts(scheme(), [(1, 2)]).unwrap();
        let ss = SketchSchedule::new(&sk, vec![vec![1], vec![1]]).unwrap();
        let e = expand_schedule(&inst, &sk, &ss).unwrap();
        assert_eq!(e.schedule.assignment(), &[0, 1, 0, 0]);
        assert_eq!(e.unsketched_jobs, 1);
    }

    #[test]
    fn bound_holds_on_an_exact_sketch() {
        let inst = Instance::new(vec![9.5, 8.0, 7.1, 7.0, 3.0, 2.2]).unwrap();
        let counts = {
            let mut c = std::collections::BTreeMap::new();
            for &p in inst.times() {
                *c.entry(scheme().interval_index(p).unwrap()).or_insert(0u64) += 1;
            }
            c
        };
        let sk = SketchInstance::from_counts(scheme(), counts).unwrap();
        let opt = exact_opt(inst.times(), 2).unwrap();
        let q = validate_sketch_quality(&inst, &sk, 2, opt).unwrap();
        assert_eq!(q.alpha, 0.0);
        let ms = meta_sketch_schedule(&sk, 2, 0.3, SolverStrategy::ExactBb).unwrap();
        let e = expand_schedule(&inst, &sk, &ms.schedule).unwrap();
        assert!(e.schedule.makespan() <= q.expansion_factor(2) * opt * (1.0 + 1e-12));
    }
}
