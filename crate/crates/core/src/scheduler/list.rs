//! Greedy list scheduling against a deadline.

use serde::{Deserialize, Serialize};

use super::solver::least_loaded;

/// Relative slack on the deadline test.
pub const DEADLINE_SLACK: f64 = 1e-9;

/// The first job that could not finish by the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unplaceable {
    pub job: usize,
    pub machine_load: f64,
}

/// Places each job, in order, on the currently least-loaded machine
/// (lowest index on ties). Fails at the first job that would end after
/// `deadline`.
///
/// `initial_loads` fixes `m`.
pub fn list_schedule(
    jobs: &[f64],
    deadline: f64,
    initial_loads: &[f64],
) -> Result<Vec<usize>, Unplaceable> {
    assert!(!initial_loads.is_empty(), "need at least one machine");
    let mut loads = initial_loads.to_vec();
    let limit = deadline * (1.0 + DEADLINE_SLACK);
    let mut assignment = Vec::with_capacity(jobs.len());
    for (job, &p) in jobs.iter().enumerate() {
        let i = least_loaded(&loads);
        if loads[i] + p > limit {
            return Err(Unplaceable {
                job,
                machine_load: loads[i],
            });
        }
        loads[i] += p;
        assignment.push(i);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_succeeds() {
        assert_eq!(list_schedule(&[], 0.0, &[0.0, 0.0]), Ok(vec![]));
    }

    #[test]
    fn exact_fit_on_one_machine() {
        assert_eq!(list_schedule(&[1.0, 2.0, 3.0], 6.0, &[0.0]), Ok(vec![0, 0, 0]));
        assert_eq!(
            list_schedule(&[1.0, 2.0, 3.5], 6.0, &[0.0]),
            Err(Unplaceable {
                job: 2,
                machine_load: 3.0
            })
        );
    }

    #[test]
    fn respects_initial_loads_and_ties() {
        let a = list_schedule(&[1.0, 1.0, 1.0], 10.0, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(a, vec![1, 2, 1]);
    }
}
