//! Config-driven simulation studies and their CSV output.

mod config;
pub mod presets;
mod runner;
mod summary;

pub use config::{EpsilonRule, ExperimentConfig, ExperimentKind, Method, ObservedBlock};
pub use runner::{
    read_csv, replication_seed, run_experiment, run_experiment_with, write_csv, CoverageTally,
    Execution, ExperimentRun, ResultRow, RunFailure, CSV_HEADER,
};
pub use summary::{capacity_curve, loglog_slope, summarize, SummaryRow};
