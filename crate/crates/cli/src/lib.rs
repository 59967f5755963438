//! Batch experiments over the `qsdc-core` simulator.
//!
//! An [`ExperimentSpec`] is read from TOML, expanded into groups of seeded
//! sessions, run in parallel and folded into a deterministic JSON
//! [`Report`]. The same spec and seed always give the same report bytes.

pub mod example;
pub mod experiment;
pub mod summary;

pub use example::{worked_example, ExampleTrace};
pub use experiment::{run_experiment, write_outputs, ExperimentSpec, Report, RunOptions, Scenario};
pub use summary::{summarize, summarize_sessions, GroupSummary, Summary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qsdc_core::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 0 ok, 1 config, 2 runtime, 3 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Core(qsdc_core::Error::InvalidConfig { .. }) => 1,
            CliError::Io { .. } | CliError::Core(_) | CliError::Runtime(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
