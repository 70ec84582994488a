//! Experiment harness for Deep Optimisation: TOML experiment configs,
//! parallel seeded batch runs, JSON records, CSV summaries and curve files.

pub mod analysis;
pub mod checks;
pub mod config;
pub mod curves;
pub mod error;
pub mod experiment;
pub mod summary;

pub use config::{ExperimentConfig, LoadedProblem, ProblemSpec, RunSpec};
pub use curves::{emit_curves, CurveKind};
pub use error::{HarnessError, Result};
pub use experiment::{execute, load_records, run_experiment, ExperimentOutput, ResultRecord, RunOptions};
pub use summary::{summarise, summary_csv, SummaryRow};
