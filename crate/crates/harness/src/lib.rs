//! Benchmark harness for the dynamic PageRank engines.
//!
//! [`experiment::run_experiment`] turns an [`experiment::ExperimentSpec`]
//! into report rows; [`report`] writes them as CSV or JSON.

pub mod experiment;
pub mod report;

pub use experiment::{
    compute_reference_ranks, geometric_mean, run_experiment, BatchSize, Chaining, ExperimentSpec,
    HarnessError, Mode,
};
pub use report::{emit_report, render, ExperimentRow, ReportError, ReportFormat};
