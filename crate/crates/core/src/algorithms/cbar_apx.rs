//! CBAR-APX: epoch-based learner for approximation oracles.
//!
//! In epoch `m` every surviving arm `i` has its representative `Z_i` pulled
//! `lambda * d^2 * 4^m` times in one consecutive block. The estimates then
//! drive the oracle, the best candidate (previous incumbent included) becomes
//! the new incumbent, and arms whose representative falls too far behind it
//! are dropped for good.

use serde::{Deserialize, Serialize};

use crate::combinatorial::{AlphaCapped, OracleStats, SuperArm, WeightedOracle};

use super::cbarbar::theoretical_lambda;
use super::{Feedback, Policy, PolicyDiagnostics, PolicyError, PolicyRng};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ApxConfig {
    /// Defaults to `1 / T`.
    pub delta: Option<f64>,
    /// Defaults to `1024 * log2((8K / delta) * log2 T)`.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApxEpochRecord {
    pub epoch: u32,
    pub pulls_per_arm: u64,
    pub alive_before: usize,
    pub alive_after: usize,
    /// Estimated value of the incumbent entering the epoch, under this
    /// epoch's estimates.
    pub incumbent_before: f64,
    /// Estimated value of the incumbent chosen at the end of the epoch.
    pub incumbent_after: f64,
    pub incumbent: SuperArm,
    pub oracle_calls: u64,
}

pub struct CbarApx<O: WeightedOracle = AlphaCapped> {
    oracle: O,
    lambda: f64,
    d: usize,
    epoch: u32,
    alive: Vec<bool>,
    /// Surviving arms in increasing order; the epoch's block order.
    active: Vec<usize>,
    reps: Vec<SuperArm>,
    incumbent: SuperArm,
    quota: u64,
    block: usize,
    used: u64,
    sums: Vec<f64>,
    counts: Vec<u64>,
    weights: Vec<f64>,
    records: Vec<ApxEpochRecord>,
}

impl<O: WeightedOracle> CbarApx<O> {
    pub fn new(cfg: ApxConfig, mut oracle: O, horizon: u64) -> Result<Self, PolicyError> {
        if horizon < 2 {
            return Err(PolicyError::Config("horizon must be at least 2".into()));
        }
        let family = oracle.family().clone();
        let (arms, d) = (family.arms(), family.max_size());
        let delta = cfg.delta.unwrap_or(1.0 / horizon as f64);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PolicyError::Config(format!("delta must lie in (0, 1), got {delta}")));
        }
        let lambda = cfg
            .lambda
            .unwrap_or_else(|| theoretical_lambda(arms, delta, horizon));
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(PolicyError::Config(format!("lambda must be positive, got {lambda}")));
        }
        let zeros = vec![0.0; arms];
        let reps = (0..arms)
            .map(|i| oracle.best_containing(&zeros, i))
            .collect::<Result<Vec<_>, _>>()?;
        let incumbent = reps.iter().min().cloned().expect("family has arms");
        let mut policy = Self {
            oracle,
            lambda,
            d,
            epoch: 0,
            alive: vec![true; arms],
            active: (0..arms).collect(),
            reps,
            incumbent,
            quota: 0,
            block: 0,
            used: 0,
            sums: vec![0.0; arms],
            counts: vec![0; arms],
            weights: vec![0.0; arms],
            records: Vec::new(),
        };
        policy.start_epoch()?;
        Ok(policy)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn incumbent(&self) -> &SuperArm {
        &self.incumbent
    }

    /// Surviving arms `K_m`.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn records(&self) -> &[ApxEpochRecord] {
        &self.records
    }

    /// Pulls per surviving arm in epoch `m`: `lambda * d^2 * 4^m`, rounded up.
    pub fn quota(&self, m: u32) -> u64 {
        let d = self.d as f64;
        (self.lambda * d * d * 4f64.powi(m as i32)).ceil() as u64
    }

    fn start_epoch(&mut self) -> Result<(), PolicyError> {
        if self.active.is_empty() {
            return Err(PolicyError::Invariant("no surviving arms".into()));
        }
        self.epoch += 1;
        self.quota = self.quota(self.epoch);
        self.block = 0;
        self.used = 0;
        self.sums.fill(0.0);
        self.counts.fill(0);
        Ok(())
    }

    fn finish_epoch(&mut self) -> Result<(), PolicyError> {
        let calls_before = self.oracle.stats().total();
        let arms = self.alive.len();
        let mut magnitude = 0.0;
        for i in 0..arms {
            if self.alive[i] {
                let mu = self.sums[i] / self.counts[i] as f64;
                self.weights[i] = mu;
                magnitude += mu.abs();
            }
        }
        // Eliminated arms get a weight below any achievable sum of live
        // estimates so the oracle only uses them when forced to.
        let penalty = -(1.0 + magnitude);
        for i in 0..arms {
            if !self.alive[i] {
                self.weights[i] = penalty;
            }
        }
        let w = &self.weights;
        let incumbent_before = self.incumbent.weight(w);
        let mut best = self.incumbent.clone();
        let mut best_value = incumbent_before;
        let mut consider = |z: &SuperArm| {
            let v = z.weight(w);
            if v > best_value || (v == best_value && *z < best) {
                best = z.clone();
                best_value = v;
            }
        };
        consider(&self.oracle.best(w)?);
        for &i in &self.active {
            let z = self.oracle.best_containing(w, i)?;
            consider(&z);
            self.reps[i] = z;
        }
        for &i in best.members() {
            self.reps[i] = best.clone();
        }
        let threshold = best_value - 0.5f64.powi(self.epoch as i32) / 4.0;
        let alive_before = self.active.len();
        for &i in &self.active {
            if self.reps[i].weight(w) <= threshold {
                self.alive[i] = false;
            }
        }
        let alive = &self.alive;
        self.active.retain(|&i| alive[i]);
        self.incumbent = best;
        self.records.push(ApxEpochRecord {
            epoch: self.epoch,
            pulls_per_arm: self.quota,
            alive_before,
            alive_after: self.active.len(),
            incumbent_before,
            incumbent_after: best_value,
            incumbent: self.incumbent.clone(),
            oracle_calls: self.oracle.stats().total() - calls_before,
        });
        self.start_epoch()
    }
}

impl<O: WeightedOracle> Policy for CbarApx<O> {
    fn name(&self) -> &'static str {
        "cbar-apx"
    }

    fn select(&mut self, _t: u64, _rng: &mut PolicyRng) -> Result<SuperArm, PolicyError> {
        Ok(self.reps[self.active[self.block]].clone())
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        let owner = self.active[self.block];
        let r = feedback.reward_of(owner).ok_or_else(|| {
            PolicyError::Invariant(format!("arm {owner} missing from its own representative"))
        })?;
        self.sums[owner] += r;
        self.counts[owner] += 1;
        self.used += 1;
        if self.used == self.quota {
            self.used = 0;
            self.block += 1;
            if self.block == self.active.len() {
                self.finish_epoch()?;
            }
        }
        Ok(())
    }

    fn oracle_stats(&self) -> OracleStats {
        self.oracle.stats()
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics {
            apx_epochs: self.records.clone(),
            ..PolicyDiagnostics::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::{ActionFamily, ExactOracle};
    use rand::SeedableRng;

    fn run_noiseless<O: WeightedOracle>(p: &mut CbarApx<O>, means: &[f64], rounds: u64) {
        let mut rng = PolicyRng::seed_from_u64(0);
        for t in 1..=rounds {
            let z = p.select(t, &mut rng).unwrap();
            let r: Vec<f64> = z.members().iter().map(|&i| means[i]).collect();
            p.observe(&Feedback::new(t, &z, &r)).unwrap();
        }
    }

    #[test]
    fn first_epoch_finds_the_optimum_without_noise() {
        let cfg = ApxConfig {
            delta: None,
            lambda: Some(1.0),
        };
        let oracle = ExactOracle::new(ActionFamily::m_set(3, 1)).unwrap();
        let mut p = CbarApx::new(cfg, oracle, 1_000).unwrap();
        assert_eq!(p.quota(1), 4);
        run_noiseless(&mut p, &[1.0, 0.0, 0.0], 12);
        assert_eq!(p.epoch(), 2);
        assert_eq!(p.incumbent(), &SuperArm::single(0));
        assert_eq!(p.active(), &[0]);
        let rec = &p.records()[0];
        assert_eq!(rec.oracle_calls, 4);
        assert!(rec.incumbent_after >= rec.incumbent_before);
    }

    #[test]
    fn incumbent_survives_a_worse_oracle_answer() {
        let oracle = ExactOracle::new(ActionFamily::m_set(2, 1)).unwrap();
        let mut p = CbarApx::new(ApxConfig { delta: None, lambda: Some(1.0) }, oracle, 1_000).unwrap();
        p.incumbent = SuperArm::single(1);
        p.sums = vec![0.0, 8.0];
        p.counts = vec![4, 4];
        p.finish_epoch().unwrap();
        assert_eq!(p.incumbent(), &SuperArm::single(1));
    }

    #[test]
    fn elimination_threshold_in_epoch_two() {
        // Threshold 2^-2 / 4 = 0.0625: a deficit of 0.06 survives, 0.07 does not.
        let oracle = ExactOracle::new(ActionFamily::m_set(3, 1)).unwrap();
        let mut p = CbarApx::new(ApxConfig { delta: None, lambda: Some(1.0) }, oracle, 1_000_000).unwrap();
        p.epoch = 2;
        p.sums = vec![0.5, 0.44, 0.43];
        p.counts = vec![1, 1, 1];
        p.finish_epoch().unwrap();
        assert_eq!(p.active(), &[0, 1]);
    }

    #[test]
    fn approximate_oracle_incumbent_is_alpha_good() {
        let family = ActionFamily::m_set(7, 3);
        let means = [0.4, 0.4, 0.4, 0.4, 0.6, 0.6, 0.6];
        let oracle = AlphaCapped::new(family, 0.8).unwrap();
        let mut p = CbarApx::new(ApxConfig { delta: None, lambda: Some(1.0) }, oracle, 1_000_000).unwrap();
        run_noiseless(&mut p, &means, 200_000);
        for rec in &p.records()[1..] {
            assert!(rec.incumbent.weight(&means) >= 0.8 * 1.8 - 1e-12);
            assert!(rec.incumbent_after >= rec.incumbent_before);
        }
    }
}
