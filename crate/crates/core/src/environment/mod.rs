//! Stochastic rewards and the corruption adversary.
//!
//! Each round the environment fixes a clean Bernoulli vector `R_t` for all
//! `K` arms, the adversary may replace it by `R_t + c_t` and pays the L-[d]
//! norm of `c_t` out of a total budget, and the learner finally sees the
//! corrupted entries of the arms it played.

mod corruption;
mod instance;
mod rewards;

use thiserror::Error;

use crate::combinatorial::OracleError;

pub use corruption::{
    begin_heuristic_schedule, ld_norm, suppress_heuristic_update, Adversary, CorruptionLedger,
    Heuristic, SUPPRESS_WINDOW,
};
pub use instance::{compute_p0, ProblemInstance};
pub use rewards::{sample_clean_rewards, RewardModel, RewardStream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("mean of arm {index} is {value}, outside [0, 1]")]
    InvalidMean { index: usize, value: f64 },
    #[error("family has {family} arms but {means} means were given")]
    ArmCountMismatch { family: usize, means: usize },
    #[error("gap must lie in (0, 0.5], got {0}")]
    InvalidGap(f64),
    #[error("corruption budget must be non-negative, got {0}")]
    InvalidBudget(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("optimal super-arm is not unique; supply p0 explicitly")]
    NonUniqueOptimum,
    #[error("unknown corruption heuristic `{0}`")]
    UnknownHeuristic(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
