//! Experiments, the invariant suite, reports and the command-line interface.

pub mod cli;
pub mod experiments;
pub mod report;
pub mod suite;

pub use experiments::{experiment_beyond_johnson, experiment_corollary, CorollaryOptions};
pub use report::{ExperimentReport, Measurement, SCHEMA_VERSION};
pub use suite::{invariant_suite, CheckKind, SuiteReport};
