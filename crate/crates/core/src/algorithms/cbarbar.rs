//! CBARBAR: epoch-based elimination-free learner that is robust to
//! corrupted rewards.
//!
//! Each epoch fixes a categorical distribution over `K + 1` slots: slot `i`
//! plays the representative super-arm `Z_i` of arm `i` with weight
//! `n_i = lambda * (Delta_i / d)^-2`, and slot `K` plays the incumbent `Z_*`
//! with weight `n_*`. At the end of an epoch the per-arm estimates feed one
//! unconstrained and `K` constrained oracle queries, which produce the next
//! representatives and gap estimates.

use std::cell::RefCell;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::combinatorial::{ExactOracle, OracleStats, SuperArm, WeightedOracle};

use super::{Feedback, Policy, PolicyDiagnostics, PolicyError, PolicyRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Confidence-driven `lambda`, base 2, restricted estimator.
    Theoretical,
    /// `lambda = 12`, base 4, pooled estimator.
    Practical,
}

/// Which exploitation length is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// `n_* = lambda * b^((m-1)/2)`.
    Mab,
    /// `n_* = lambda * d^2 * K * b^((m-1)/2)`.
    Cmab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbarbarConfig {
    pub mode: Mode,
    /// Defaults to MAB when `d = 1`, CMAB otherwise.
    pub setting: Option<Setting>,
    /// Confidence parameter; defaults to `1 / T`.
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    /// Only honoured in practical mode; theoretical mode always uses 2.
    pub base: Option<f64>,
}

impl CbarbarConfig {
    pub fn practical() -> Self {
        Self {
            mode: Mode::Practical,
            setting: None,
            delta: None,
            lambda: None,
            base: None,
        }
    }

    pub fn theoretical() -> Self {
        Self {
            mode: Mode::Theoretical,
            ..Self::practical()
        }
    }
}

/// Fully resolved constants of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbarbarParams {
    pub mode: Mode,
    pub setting: Setting,
    pub lambda: f64,
    pub base: f64,
    pub arms: usize,
    pub d: usize,
    pub horizon: u64,
}

/// `lambda = 1024 * log2((8K / delta) * log2 T)`.
pub fn theoretical_lambda(arms: usize, delta: f64, horizon: u64) -> f64 {
    1024.0 * ((8.0 * arms as f64 / delta) * (horizon as f64).log2()).log2()
}

/// Next-epoch gap estimate: `max(b^(-m/4), r_star - r_i, Delta_i / 2)`.
pub fn gap_update(epoch: u32, base: f64, upper_star: f64, lower_i: f64, gap: f64) -> f64 {
    let floor = base.powf(-(epoch as f64) / 4.0);
    floor.max(upper_star - lower_i).max(gap / 2.0)
}

impl CbarbarParams {
    pub fn resolve(cfg: &CbarbarConfig, arms: usize, d: usize, horizon: u64) -> Result<Self, PolicyError> {
        if horizon < 2 {
            return Err(PolicyError::Config("horizon must be at least 2".into()));
        }
        let delta = cfg.delta.unwrap_or(1.0 / horizon as f64);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PolicyError::Config(format!("delta must lie in (0, 1), got {delta}")));
        }
        let (default_lambda, base) = match cfg.mode {
            Mode::Theoretical => (theoretical_lambda(arms, delta, horizon), 2.0),
            Mode::Practical => (12.0, cfg.base.unwrap_or(4.0)),
        };
        let lambda = cfg.lambda.unwrap_or(default_lambda);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(PolicyError::Config(format!("lambda must be positive, got {lambda}")));
        }
        if !(base.is_finite() && base > 1.0) {
            return Err(PolicyError::Config(format!("base must exceed 1, got {base}")));
        }
        let setting = cfg
            .setting
            .unwrap_or(if d == 1 { Setting::Mab } else { Setting::Cmab });
        Ok(Self {
            mode: cfg.mode,
            setting,
            lambda,
            base,
            arms,
            d,
            horizon,
        })
    }

    /// Exploitation pulls `n_*` in epoch `m` (rounded up).
    pub fn n_star(&self, m: u32) -> u64 {
        let growth = self.base.powf((m as f64 - 1.0) / 2.0);
        let scale = match self.setting {
            Setting::Mab => 1.0,
            Setting::Cmab => (self.d * self.d * self.arms) as f64,
        };
        (self.lambda * scale * growth).ceil() as u64
    }

    /// Exploration pulls `n_i` for an arm with gap estimate `gap`.
    pub fn n_arm(&self, gap: f64) -> u64 {
        let d = self.d as f64;
        (self.lambda * (d / gap).powi(2)).ceil() as u64
    }
}

/// Book-keeping of one epoch, kept for invariant checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u32,
    /// `N^m`.
    pub length: u64,
    pub n_star: u64,
    /// `n_i^m` per arm.
    pub n_arms: Vec<u64>,
    /// `Delta_i^m` per arm.
    pub gaps: Vec<f64>,
    /// `|sum q - 1|` as computed in floating point.
    pub q_sum_error: f64,
    /// Whether the epoch ran to its planned end before the horizon.
    pub completed: bool,
    /// Oracle queries issued by this epoch's closing update.
    pub oracle_calls: u64,
}

pub struct Cbarbar<O: WeightedOracle = ExactOracle> {
    params: CbarbarParams,
    oracle: O,
    epoch: u32,
    gaps: Vec<f64>,
    /// Slots `0..K` hold `Z_i`, slot `K` holds `Z_*`.
    reps: Vec<SuperArm>,
    counts: Vec<u64>,
    epoch_len: u64,
    epoch_end: u64,
    sampler: WeightedIndex<u64>,
    last_slot: usize,
    played: u64,
    restricted_sum: Vec<f64>,
    pooled_sum: Vec<f64>,
    pooled_count: Vec<u64>,
    mu_hat: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    records: Vec<EpochRecord>,
    mass_cache: RefCell<Option<(u32, SuperArm, f64)>>,
}

impl<O: WeightedOracle> Cbarbar<O> {
    pub fn new(cfg: CbarbarConfig, mut oracle: O, horizon: u64) -> Result<Self, PolicyError> {
        let family = oracle.family().clone();
        let (arms, d) = (family.arms(), family.max_size());
        let params = CbarbarParams::resolve(&cfg, arms, d, horizon)?;
        // Arbitrary valid initial representatives: the oracle's answers on
        // an all-zero weight vector.
        let zeros = vec![0.0; arms];
        let mut reps = Vec::with_capacity(arms + 1);
        for i in 0..arms {
            reps.push(oracle.best_containing(&zeros, i)?);
        }
        reps.push(oracle.best(&zeros)?);
        let mut policy = Self {
            params,
            oracle,
            epoch: 0,
            gaps: vec![1.0; arms],
            reps,
            counts: vec![0; arms + 1],
            epoch_len: 0,
            epoch_end: 0,
            sampler: WeightedIndex::new([1u64]).expect("non-empty weights"),
            last_slot: 0,
            played: 0,
            restricted_sum: vec![0.0; arms],
            pooled_sum: vec![0.0; arms],
            pooled_count: vec![0; arms],
            mu_hat: vec![0.5; arms],
            upper: vec![0.0; arms],
            lower: vec![0.0; arms],
            records: Vec::new(),
            mass_cache: RefCell::new(None),
        };
        policy.start_epoch()?;
        Ok(policy)
    }

    pub fn params(&self) -> &CbarbarParams {
        &self.params
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Latest per-arm estimates `mu_hat`.
    pub fn estimates(&self) -> &[f64] {
        &self.mu_hat
    }

    pub fn representatives(&self) -> &[SuperArm] {
        &self.reps[..self.params.arms]
    }

    pub fn incumbent(&self) -> &SuperArm {
        &self.reps[self.params.arms]
    }

    /// Sampling probabilities `(q_1..q_K, q_*)` of the current epoch.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.epoch_len as f64;
        self.counts.iter().map(|&n| n as f64 / total).collect()
    }

    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    fn start_epoch(&mut self) -> Result<(), PolicyError> {
        self.epoch += 1;
        let m = self.epoch;
        for (i, &gap) in self.gaps.iter().enumerate() {
            if !(gap.is_finite() && gap > 0.0) {
                return Err(PolicyError::Invariant(format!(
                    "gap estimate of arm {i} is {gap} in epoch {m}"
                )));
            }
        }
        for i in 0..self.params.arms {
            self.counts[i] = self.params.n_arm(self.gaps[i]);
        }
        let n_star = self.params.n_star(m);
        self.counts[self.params.arms] = n_star;
        self.epoch_len = self.counts.iter().sum();
        self.epoch_end = self.played + self.epoch_len;
        self.sampler = WeightedIndex::new(&self.counts)
            .map_err(|e| PolicyError::Invariant(format!("epoch {m} weights: {e}")))?;
        let q_sum: f64 = self.probabilities().iter().sum();
        self.records.push(EpochRecord {
            epoch: m,
            length: self.epoch_len,
            n_star,
            n_arms: self.counts[..self.params.arms].to_vec(),
            gaps: self.gaps.clone(),
            q_sum_error: (q_sum - 1.0).abs(),
            completed: false,
            oracle_calls: 0,
        });
        self.restricted_sum.fill(0.0);
        self.pooled_sum.fill(0.0);
        self.pooled_count.fill(0);
        Ok(())
    }

    fn estimate(&mut self) {
        let k = self.params.arms;
        match self.params.mode {
            Mode::Theoretical => {
                for i in 0..k {
                    self.mu_hat[i] = self.restricted_sum[i] / self.counts[i] as f64;
                }
            }
            Mode::Practical => {
                for i in 0..k {
                    if self.pooled_count[i] > 0 {
                        self.mu_hat[i] = self.pooled_sum[i] / self.pooled_count[i] as f64;
                    }
                }
            }
        }
    }

    fn finish_epoch(&mut self) -> Result<(), PolicyError> {
        let calls_before = self.oracle.stats().total();
        self.estimate();
        let k = self.params.arms;
        let d = self.params.d as f64;
        for i in 0..k {
            let radius = self.gaps[i] / (16.0 * d);
            self.upper[i] = self.mu_hat[i] + radius;
            self.lower[i] = self.mu_hat[i] - radius;
        }
        let upper_star = self.oracle.best(&self.upper)?.weight(&self.upper);
        let mut best: Option<(f64, usize)> = None;
        let mut lower_values = vec![0.0; k];
        for i in 0..k {
            let z = self.oracle.best_containing(&self.lower, i)?;
            let value = z.weight(&self.lower);
            lower_values[i] = value;
            self.reps[i] = z;
            // Every super-arm contains some arm, so the best constrained
            // answer is also the unconstrained optimum of the lower bounds.
            best = match best {
                Some((bv, bi)) if value < bv || (value == bv && self.reps[i] >= self.reps[bi]) => {
                    Some((bv, bi))
                }
                _ => Some((value, i)),
            };
        }
        if let Some((_, i)) = best {
            self.reps[k] = self.reps[i].clone();
        }
        let m = self.epoch;
        for i in 0..k {
            self.gaps[i] = gap_update(m, self.params.base, upper_star, lower_values[i], self.gaps[i]);
        }
        if let Some(rec) = self.records.last_mut() {
            rec.completed = true;
            rec.oracle_calls = self.oracle.stats().total() - calls_before;
        }
        self.start_epoch()
    }
}

impl<O: WeightedOracle> Policy for Cbarbar<O> {
    fn name(&self) -> &'static str {
        match self.params.mode {
            Mode::Practical => "cbarbar",
            Mode::Theoretical => "cbarbar-theoretical",
        }
    }

    fn select(&mut self, _t: u64, rng: &mut PolicyRng) -> Result<SuperArm, PolicyError> {
        self.last_slot = self.sampler.sample(rng);
        Ok(self.reps[self.last_slot].clone())
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        let k = self.params.arms;
        match self.params.mode {
            Mode::Theoretical => {
                let slot = self.last_slot;
                if slot < k {
                    if let Some(r) = feedback.reward_of(slot) {
                        self.restricted_sum[slot] += r;
                    }
                }
            }
            Mode::Practical => {
                for (arm, r) in feedback.iter() {
                    self.pooled_sum[arm] += r;
                    self.pooled_count[arm] += 1;
                }
            }
        }
        self.played += 1;
        if self.played == self.epoch_end && self.played < self.params.horizon {
            self.finish_epoch()?;
        } else if self.played == self.epoch_end {
            if let Some(rec) = self.records.last_mut() {
                rec.completed = true;
            }
        }
        Ok(())
    }

    fn probability_of(&self, target: &SuperArm) -> Option<f64> {
        if let Some((m, z, p)) = self.mass_cache.borrow().as_ref() {
            if *m == self.epoch && z == target {
                return Some(*p);
            }
        }
        let mass: u64 = self
            .reps
            .iter()
            .zip(&self.counts)
            .filter(|(z, _)| *z == target)
            .map(|(_, &n)| n)
            .sum();
        let p = mass as f64 / self.epoch_len as f64;
        *self.mass_cache.borrow_mut() = Some((self.epoch, target.clone(), p));
        Some(p)
    }

    fn action_distribution(&self) -> Option<Vec<(SuperArm, f64)>> {
        let mut out: Vec<(SuperArm, f64)> = Vec::new();
        for (z, &n) in self.reps.iter().zip(&self.counts) {
            let q = n as f64 / self.epoch_len as f64;
            match out.iter_mut().find(|(w, _)| w == z) {
                Some(entry) => entry.1 += q,
                None => out.push((z.clone(), q)),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Some(out)
    }

    fn oracle_stats(&self) -> OracleStats {
        self.oracle.stats()
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics {
            cbarbar: Some(self.params),
            epochs: self.records.clone(),
            ..PolicyDiagnostics::default()
        }
    }
}
