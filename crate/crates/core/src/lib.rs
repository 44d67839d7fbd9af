//! Sublinear-time estimation of the optimal makespan on identical machines.
//!
//! A weighted sampler over the job list feeds one of two sketch builders
//! (known or unknown job count). The sketch, a short list of
//! `<estimated count, rounded time>` pairs, is then handed to the scheduler,
//! which returns an estimate of the optimal makespan and optionally a
//! per-machine count schedule that can be expanded once all jobs are visible.

pub mod adaptive;
pub mod birthday;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod instance;
pub mod interval;
pub mod known;
pub mod params;
pub mod sampler;
pub mod scheduler;
pub mod sketch;
pub mod stats;

pub use adaptive::{sketch_adaptive, AdaptiveConfig, AdaptiveRun};
pub use error::{Error, Result};
pub use instance::Instance;
pub use interval::IntervalScheme;
pub use known::{sketch_known_n, KnownNConfig, KnownRun};
pub use params::Params;
pub use sampler::{Sample, SamplerIndex, WeightedSampler};
pub use sketch::{
    validate_sketch_quality, ConcreteSchedule, SketchEntry, SketchInstance, SketchQuality,
    SketchSchedule,
};
