use serde::{Deserialize, Serialize};

use super::EnvError;

/// Independent Bernoulli arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    means: Vec<f64>,
}

impl RewardModel {
    pub fn new(means: Vec<f64>) -> Result<Self, EnvError> {
        if let Some((index, &value)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(EnvError::InvalidMean { index, value });
        }
        Ok(Self { means })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random-access stream of clean reward vectors.
///
/// The reward of arm `i` in round `t` is the SplitMix64 output at counter
/// position `t * K + i`, thresholded against the arm mean. The whole vector
/// `R_t` is therefore fixed by the seed before anyone looks at it, whether
/// or not every entry is materialized, and two runs sharing a seed see the
/// same clean rewards regardless of what the learner plays.
#[derive(Debug, Clone)]
pub struct RewardStream {
    key: u64,
    arms: u64,
}

impl RewardStream {
    pub fn new(seed: u64, arms: usize) -> Self {
        Self {
            key: mix64(seed ^ 0x5eed_c1ea_4e3a_2d01),
            arms: arms as u64,
        }
    }

    /// Uniform draw in `[0, 1)` for arm `arm` at round `t` (1-based).
    #[inline]
    pub fn uniform(&self, t: u64, arm: usize) -> f64 {
        let pos = t.wrapping_mul(self.arms).wrapping_add(arm as u64);
        let bits = mix64(self.key.wrapping_add(pos.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn reward(&self, model: &RewardModel, t: u64, arm: usize) -> f64 {
        if self.uniform(t, arm) < model.means[arm] {
            1.0
        } else {
            0.0
        }
    }

    /// Fills `out` with the full clean vector `R_t`.
    pub fn fill_round(&self, model: &RewardModel, t: u64, out: &mut [f64]) {
        for (arm, slot) in out.iter_mut().enumerate() {
            *slot = self.reward(model, t, arm);
        }
    }
}

/// Draws the full clean reward vector for round `t`.
pub fn sample_clean_rewards(model: &RewardModel, stream: &RewardStream, t: u64) -> Vec<f64> {
    let mut out = vec![0.0; model.arms()];
    stream.fill_round(model, t, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_means() {
        assert!(matches!(
            RewardModel::new(vec![0.2, 1.2]),
            Err(EnvError::InvalidMean { index: 1, .. })
        ));
    }

    #[test]
    fn degenerate_arms() {
        let stream = RewardStream::new(7, 3);
        let ones = RewardModel::new(vec![1.0, 1.0]).unwrap();
        let mixed = RewardModel::new(vec![0.0, 0.5, 1.0]).unwrap();
        for t in 1..1000 {
            assert_eq!(sample_clean_rewards(&ones, &RewardStream::new(3, 2), t), vec![1.0, 1.0]);
            let r = sample_clean_rewards(&mixed, &stream, t);
            assert_eq!(r[0], 0.0);
            assert_eq!(r[2], 1.0);
            assert!(r[1] == 0.0 || r[1] == 1.0);
        }
    }

    #[test]
    fn empirical_mean_within_three_sigma() {
        // sigma = sqrt(0.24 / 1e6) ~ 0.00049
        let model = RewardModel::new(vec![0.6]).unwrap();
        let stream = RewardStream::new(2024, 1);
        let n = 1_000_000u64;
        let total: f64 = (1..=n).map(|t| stream.reward(&model, t, 0)).sum();
        let mean = total / n as f64;
        assert!((mean - 0.6).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn random_access_matches_full_vector() {
        let model = RewardModel::new(vec![0.3, 0.5, 0.7, 0.9]).unwrap();
        let stream = RewardStream::new(11, 4);
        for t in [1, 2, 99, 1_000_000] {
            let full = sample_clean_rewards(&model, &stream, t);
            for (arm, r) in full.iter().enumerate() {
                assert_eq!(*r, stream.reward(&model, t, arm));
            }
        }
    }

    #[test]
    fn seeds_give_different_streams() {
        let a = RewardStream::new(1, 2);
        let b = RewardStream::new(2, 2);
        let differs = (1..200).any(|t| a.uniform(t, 0) != b.uniform(t, 0));
        assert!(differs);
    }
}
