//! Learners for the corrupted combinatorial semi-bandit.
//!
//! All learners implement [`Policy`]. A policy that samples from an explicit
//! distribution over super-arms reports it through
//! [`Policy::probability_of`], which the SUPPRESS adversary uses.

mod cbar_apx;
mod cbarbar;
mod combucb1;
mod tsallis;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorial::{AlphaCapped, ExactOracle, OracleError, OracleStats, SuperArm};
use crate::environment::ProblemInstance;

pub use cbar_apx::{ApxConfig, ApxEpochRecord, CbarApx};
pub use cbarbar::{
    gap_update, theoretical_lambda, Cbarbar, CbarbarConfig, CbarbarParams, EpochRecord, Mode,
    Setting,
};
pub use combucb1::{combucb1_indices, CombUcb1};
pub use tsallis::{solve_tsallis, TsallisInf, TsallisSolution, TSALLIS_TOLERANCE};

/// Generator handed to policies for their own randomization.
pub type PolicyRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// What the learner sees after playing: the corrupted reward of each
/// member of the chosen super-arm, in member order.
#[derive(Debug, Clone, Copy)]
pub struct Feedback<'a> {
    pub t: u64,
    pub chosen: &'a SuperArm,
    pub rewards: &'a [f64],
}

impl<'a> Feedback<'a> {
    pub fn new(t: u64, chosen: &'a SuperArm, rewards: &'a [f64]) -> Self {
        assert_eq!(
            chosen.len(),
            rewards.len(),
            "semi-bandit feedback must cover exactly the chosen arms"
        );
        Self { t, chosen, rewards }
    }

    /// Reward of `arm` if it was played.
    pub fn reward_of(&self, arm: usize) -> Option<f64> {
        self.chosen
            .members()
            .binary_search(&arm)
            .ok()
            .map(|pos| self.rewards[pos])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.chosen
            .members()
            .iter()
            .copied()
            .zip(self.rewards.iter().copied())
    }
}

/// Per-run internals a policy exposes for invariant checking.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyDiagnostics {
    /// Resolved CBARBAR constants, when the policy is CBARBAR.
    pub cbarbar: Option<CbarbarParams>,
    pub epochs: Vec<EpochRecord>,
    pub apx_epochs: Vec<ApxEpochRecord>,
    /// Largest `|sum x - 1|` seen by the Tsallis-INF solver.
    pub max_simplex_residual: Option<f64>,
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    /// Chooses the super-arm for round `t` (1-based, consecutive).
    fn select(&mut self, t: u64, rng: &mut PolicyRng) -> Result<SuperArm, PolicyError>;

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError>;

    /// Probability that the next `select` returns `target`, for policies
    /// that sample from an explicit distribution.
    fn probability_of(&self, _target: &SuperArm) -> Option<f64> {
        None
    }

    /// The full distribution of the next `select`, when exposed.
    fn action_distribution(&self) -> Option<Vec<(SuperArm, f64)>> {
        None
    }

    fn oracle_stats(&self) -> OracleStats;

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// CBARBAR with the practical parameterization.
    Cbarbar,
    CbarbarTheoretical,
    Tsallis,
    Combucb1,
    CbarApx,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Cbarbar => "cbarbar",
            PolicyKind::CbarbarTheoretical => "cbarbar-theoretical",
            PolicyKind::Tsallis => "tsallis",
            PolicyKind::Combucb1 => "combucb1",
            PolicyKind::CbarApx => "cbar-apx",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbarbar" => Ok(PolicyKind::Cbarbar),
            "cbarbar-theoretical" => Ok(PolicyKind::CbarbarTheoretical),
            "tsallis" => Ok(PolicyKind::Tsallis),
            "combucb1" => Ok(PolicyKind::Combucb1),
            "cbar-apx" => Ok(PolicyKind::CbarApx),
            other => Err(PolicyError::Config(format!("unknown policy `{other}`"))),
        }
    }
}

/// Declarative policy description; unset fields take each policy's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub base: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub setting: Option<Setting>,
    /// Approximation ratio of the oracle handed to CBAR-APX.
    #[serde(default = "one")]
    pub alpha: f64,
    /// `c` in the Tsallis-INF learning rate `c / sqrt(t)`.
    #[serde(default = "one")]
    pub eta_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            lambda: None,
            base: None,
            delta: None,
            setting: None,
            alpha: 1.0,
            eta_scale: 1.0,
        }
    }

    /// Builds a fresh policy (with its own oracle) for one run.
    pub fn build(
        &self,
        instance: &ProblemInstance,
        horizon: u64,
    ) -> Result<Box<dyn Policy>, PolicyError> {
        let family = instance.family().clone();
        Ok(match self.kind {
            PolicyKind::Cbarbar | PolicyKind::CbarbarTheoretical => {
                let mode = if self.kind == PolicyKind::Cbarbar {
                    Mode::Practical
                } else {
                    Mode::Theoretical
                };
                let cfg = CbarbarConfig {
                    mode,
                    setting: self.setting,
                    delta: self.delta,
                    lambda: self.lambda,
                    base: self.base,
                };
                Box::new(Cbarbar::new(cfg, ExactOracle::new(family)?, horizon)?)
            }
            PolicyKind::CbarApx => {
                let oracle = AlphaCapped::new(family, self.alpha)?;
                let cfg = ApxConfig {
                    delta: self.delta,
                    lambda: self.lambda,
                };
                Box::new(CbarApx::new(cfg, oracle, horizon)?)
            }
            PolicyKind::Tsallis => Box::new(TsallisInf::new(&family, self.eta_scale)?),
            PolicyKind::Combucb1 => Box::new(CombUcb1::new(ExactOracle::new(family)?)),
        })
    }
}
