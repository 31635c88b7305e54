//! Pipeline orchestration and HTTP service behind the `agriplan` binary.

pub mod config;
pub mod pipeline;
pub mod service;

pub use config::PipelineConfig;
pub use pipeline::{run_pipeline, RunReport, StageError};
