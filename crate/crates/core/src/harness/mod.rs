//! Experiment orchestration behind the `xrda` binary: config parsing,
//! seeded runs, CSV traces, bound checks and preset comparisons.

mod check;
mod config;
mod experiment;
mod trace;

use std::fmt;
use std::path::PathBuf;

pub use check::{check_bound, BoundReport, DEFAULT_SLACK, STOCHASTIC_FACTOR};
pub use config::{
    parse_config, parse_config_in, ConfigError, ConfigErrors, ExperimentConfig, ScheduleConfig, ScheduleKind,
    CONFIG_VERSION,
};
pub use experiment::{
    compare, default_presets, gen_problem, load_or_compute_reference, parse_preset, run_experiment,
    CompareRow, Comparison,
};
pub use trace::{read_trace_csv, write_trace_csv, TRACE_HEADER};

/// Harness failures, each mapped to a process exit code.
#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigErrors),
    Usage(String),
    Io { path: PathBuf, message: String },
    Solver(crate::Error),
    BoundViolated(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Usage(_) => 1,
            HarnessError::Io { .. } | HarnessError::Solver(_) => 2,
            HarnessError::BoundViolated(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl fmt::Display) -> Self {
        HarnessError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Usage(m) => write!(f, "usage error: {m}"),
            HarnessError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            HarnessError::Solver(e) => write!(f, "{e}"),
            HarnessError::BoundViolated(m) => write!(f, "bound check failed: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<crate::Error> for HarnessError {
    fn from(e: crate::Error) -> Self {
        HarnessError::Solver(e)
    }
}

impl From<ConfigErrors> for HarnessError {
    fn from(e: ConfigErrors) -> Self {
        HarnessError::Config(e)
    }
}
