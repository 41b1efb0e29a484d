//! Super-arms, combinatorial action families and weighted oracles.
//!
//! Two families are supported: m-sets (all subsets of a fixed size) and
//! matroid bases. Every oracle answers the unconstrained query
//! `argmax_Z sum_{j in Z} w_j` and the constrained query restricted to
//! super-arms containing a given arm. Ties are always broken towards the
//! lexicographically smallest sorted member list.

mod alpha;
mod family;
mod oracle;
mod superarm;

use thiserror::Error;

pub use alpha::AlphaCapped;
pub use family::{binomial, ActionFamily, Matroid, MatroidKind, ENUMERATION_BUDGET};
pub use oracle::{
    best_superarm, best_superarm_containing, brute_force_best, matroid_greedy, ExactOracle,
    OracleStats, WeightedOracle,
};
pub use superarm::{exact_sum, SuperArm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("action family is empty")]
    EmptyFamily,
    #[error("no feasible super-arm contains arm {arm}")]
    InfeasibleConstraint { arm: usize },
    #[error("arm {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("weight {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("family has {count} feasible super-arms, enumeration budget is {budget}")]
    EnumerationBudget { count: u128, budget: u128 },
    #[error("approximation wrapper needs an enumerable family ({count} super-arms)")]
    UnsupportedApproximation { count: u128 },
    #[error("approximation ratio must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),
}

/// Wraps an exact oracle into the adversarially tight `alpha`-approximation.
pub fn alpha_capped(oracle: ExactOracle, alpha: f64) -> Result<AlphaCapped, OracleError> {
    AlphaCapped::new(oracle.family().clone(), alpha)
}
