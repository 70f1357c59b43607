//! Seeded Monte Carlo driver for the reflect-beamforming experiments.
//!
//! [`spec`] parses experiment files, [`runner`] executes them trial-parallel
//! and writes CSV plus a JSON manifest, [`summary`] aggregates the CSVs.
//! Every trial draws from its own random stream, so outputs do not depend
//! on the worker count.

pub mod runner;
pub mod spec;
pub mod summary;

pub use runner::{run_spec, RunOptions, RunOutput};
pub use spec::{Experiment, ExperimentSpec, Scheme, Sweep};
pub use summary::{summarize, SummaryRow};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] ris_core::CoreError),
}

impl ExperimentError {
    /// Process exit code: 2 for malformed input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Parse { .. } | ExperimentError::Schema(_) => 2,
            _ => 1,
        }
    }
}
