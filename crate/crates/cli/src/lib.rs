//! Configuration-driven front end for the paracr invariant engine.

pub mod config;
pub mod expr_check;
pub mod jobs;
pub mod report;

pub use config::{ConfigError, JobConfig, JobKind};
pub use jobs::{run_job, run_job_with};
pub use report::{render_report, Format, RunReport};
