//! CombUCB1: optimism in the face of uncertainty, one oracle call per round.

use crate::combinatorial::{ExactOracle, OracleStats, SuperArm, WeightedOracle};

use super::{Feedback, Policy, PolicyError, PolicyRng};

/// `mu_i + sqrt(1.5 ln t / T_i)` for every arm. All counts must be positive.
pub fn combucb1_indices(means: &[f64], counts: &[u64], t: u64) -> Vec<f64> {
    let log_t = (t.max(1) as f64).ln();
    means
        .iter()
        .zip(counts)
        .map(|(&mu, &n)| mu + (1.5 * log_t / n as f64).sqrt())
        .collect()
}

pub struct CombUcb1<O: WeightedOracle = ExactOracle> {
    oracle: O,
    sums: Vec<f64>,
    counts: Vec<u64>,
    means: Vec<f64>,
}

impl<O: WeightedOracle> CombUcb1<O> {
    pub fn new(oracle: O) -> Self {
        let arms = oracle.family().arms();
        Self {
            oracle,
            sums: vec![0.0; arms],
            counts: vec![0; arms],
            means: vec![0.0; arms],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl<O: WeightedOracle> Policy for CombUcb1<O> {
    fn name(&self) -> &'static str {
        "combucb1"
    }

    fn select(&mut self, t: u64, _rng: &mut PolicyRng) -> Result<SuperArm, PolicyError> {
        if let Some(unseen) = self.counts.iter().position(|&n| n == 0) {
            // Prefer covering other unseen arms in the same round.
            let w: Vec<f64> = self.counts.iter().map(|&n| f64::from(u8::from(n == 0))).collect();
            return Ok(self.oracle.best_containing(&w, unseen)?);
        }
        let w = combucb1_indices(&self.means, &self.counts, t);
        Ok(self.oracle.best(&w)?)
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        for (arm, r) in feedback.iter() {
            self.sums[arm] += r;
            self.counts[arm] += 1;
            self.means[arm] = self.sums[arm] / self.counts[arm] as f64;
        }
        Ok(())
    }

    fn oracle_stats(&self) -> OracleStats {
        self.oracle.stats()
    }
}
