//! Seeded experiment runner: the environment/policy loop, invariant checks,
//! aggregation over repeats, CSV output and the table presets.

mod config;
mod experiment;
mod output;
mod presets;
mod run;
mod selftest;

use std::path::PathBuf;

use thiserror::Error;

use crate::algorithms::PolicyError;
use crate::combinatorial::OracleError;
use crate::environment::EnvError;

pub use config::{ExperimentSpec, HeuristicSet};
pub use experiment::{aggregate, run_experiment, AggregateReport, ExperimentResult, HeuristicSummary};
pub use output::{checkpoint_label, emit_csv, format_table, write_csv, CSV_FIXED_COLUMNS};
pub use presets::{table_command, TablePreset};
pub use run::{checkpoint_schedule, check_diagnostics, run_one, run_with_policy, RunRecord, RunSetup};
pub use selftest::{selftest, SelftestReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("seed {seed}: {source}")]
    Run {
        seed: u64,
        #[source]
        source: PolicyError,
    },
    #[error("seed {seed}: invariant violated: {message}")]
    Invariant { seed: u64, message: String },
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// Whether the failure is an invariant violation rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(
            self,
            HarnessError::Invariant { .. }
                | HarnessError::Run {
                    source: PolicyError::Invariant(_),
                    ..
                }
                | HarnessError::Policy(PolicyError::Invariant(_))
        )
    }
}
