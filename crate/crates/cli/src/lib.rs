//! Experiment harness for the needlab crate: configuration-driven sweeps,
//! report emission and the two application demos.

pub mod config;
pub mod demos;
mod error;
pub mod report;
pub mod sweep;

pub use config::ExperimentConfig;
pub use demos::{demo_point_source_test, demo_threshold_density};
pub use error::{HarnessError, Result};
pub use report::{emit_report, ReportFormat};
pub use sweep::{run_sweep, run_sweep_with, ResultRow, ResultTable, SweepContext};
