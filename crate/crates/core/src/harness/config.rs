use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{PolicyConfig, PolicyKind};
use crate::environment::{Heuristic, ProblemInstance};

use super::HarnessError;

/// Which corruption heuristics an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicSet {
    None,
    Begin,
    Suppress,
    /// BEGIN and SUPPRESS on paired seeds; the reported figure is the
    /// per-seed maximum.
    Both,
}

impl HeuristicSet {
    pub fn heuristics(&self) -> Vec<Heuristic> {
        match self {
            HeuristicSet::None => vec![Heuristic::None],
            HeuristicSet::Begin => vec![Heuristic::Begin],
            HeuristicSet::Suppress => vec![Heuristic::Suppress],
            HeuristicSet::Both => vec![Heuristic::Begin, Heuristic::Suppress],
        }
    }
}

impl std::str::FromStr for HeuristicSet {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(HeuristicSet::None),
            "begin" => Ok(HeuristicSet::Begin),
            "suppress" => Ok(HeuristicSet::Suppress),
            "both" => Ok(HeuristicSet::Both),
            other => Err(HarnessError::Config(format!("unknown heuristic set `{other}`"))),
        }
    }
}

/// One experiment on the benchmark m-set instance. Field names double as
/// the keys of the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(rename = "K")]
    pub arms: usize,
    pub d: usize,
    /// Instance gap: optimal arms have mean `1/2 + delta`, the rest `1/2 - delta`.
    pub delta: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(rename = "C")]
    pub budget: f64,
    pub policy: PolicyKind,
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub base: Option<f64>,
    /// Confidence parameter of the epoch-based learners (defaults to `1/T`).
    pub confidence: Option<f64>,
    pub eta_scale: f64,
    pub heuristic: HeuristicSet,
    /// Overrides the SUPPRESS baseline probability.
    pub p0: Option<f64>,
    pub repeats: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; `1` forces sequential execution.
    pub workers: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            arms: 10,
            d: 1,
            delta: 0.1,
            horizon: 100_000,
            budget: 0.0,
            policy: PolicyKind::Cbarbar,
            alpha: 1.0,
            lambda: None,
            base: None,
            confidence: None,
            eta_scale: 1.0,
            heuristic: HeuristicSet::Both,
            p0: None,
            repeats: 1,
            seed: 0,
            out: None,
            workers: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.repeats == 0 {
            return Err(HarnessError::Config("repeats must be at least 1".into()));
        }
        if self.d == 0 || self.d > self.arms {
            return Err(HarnessError::Config(format!(
                "need 1 <= d <= K, got d = {} and K = {}",
                self.d, self.arms
            )));
        }
        if self.horizon < self.arms as u64 {
            return Err(HarnessError::Config(format!(
                "horizon {} is shorter than K = {}",
                self.horizon, self.arms
            )));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<ProblemInstance, HarnessError> {
        Ok(ProblemInstance::m_set_benchmark(self.arms, self.d, self.delta)?)
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            kind: self.policy,
            lambda: self.lambda,
            base: self.base,
            delta: self.confidence,
            setting: None,
            alpha: self.alpha,
            eta_scale: self.eta_scale,
        }
    }

    /// Seeds `seed, seed + 1, ..`, one per repeat.
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.repeats).map(move |r| self.seed.wrapping_add(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_uses_cli_names() {
        let spec = ExperimentSpec::from_toml_str(
            "K = 7\nd = 3\ndelta = 0.1\nT = 1000\nC = 60.0\npolicy = \"cbar-apx\"\nalpha = 0.8\nheuristic = \"suppress\"\n",
        )
        .unwrap();
        assert_eq!(spec.arms, 7);
        assert_eq!(spec.policy, PolicyKind::CbarApx);
        assert_eq!(spec.heuristic, HeuristicSet::Suppress);
        assert_eq!(spec.repeats, 1);
        let back = ExperimentSpec::from_toml_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentSpec::from_toml_str("arms = 3").is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentSpec::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentSpec { repeats: 0, ..ok.clone() },
            ExperimentSpec { d: 11, ..ok.clone() },
            ExperimentSpec { horizon: 5, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
