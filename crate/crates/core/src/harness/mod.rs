//! Experiment plumbing: instance generators, the end-to-end runner, reports
//! and the validation suites.

pub mod estimate;
pub mod generate;
pub mod report;
pub mod validate;

pub use estimate::{run_estimate, EstimateOptions, EstimateOutcome};
pub use generate::{Family, GeneratorSpec};
pub use report::{ExperimentReport, Mode};
pub use validate::{run_validation_suite, CriterionResult, Suite, SuiteSummary};
