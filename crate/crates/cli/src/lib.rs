//! Batch experiments for the rooted length statistic of the minimal directed
//! spanning tree: configuration, replicate orchestration, CSV records and
//! JSON summaries.

pub mod config;
pub mod error;
pub mod experiment;
pub mod records;

pub use config::{ConfigOverrides, ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_experiment_with_progress, Summary};
pub use records::{load_records, ExperimentRecord};
