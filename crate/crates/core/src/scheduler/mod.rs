//! Everything downstream of a sketch.

pub mod deterministic;
pub mod expand;
pub mod list;
pub mod meta;
pub mod oracle;
pub mod solver;

pub use deterministic::{deterministic_sketch, deterministic_sketch_at};
pub use expand::{expand_schedule, Expansion};
pub use list::{list_schedule, Unplaceable};
pub use meta::{meta_approx, meta_sketch_schedule, MetaCertificate, MetaOutcome, MetaSchedule};
pub use oracle::{exact_opt, exact_opt_grouped};
pub use solver::{lpt_ratio, solve_largest, SolverOutcome, SolverStrategy};
