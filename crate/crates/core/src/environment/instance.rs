use crate::combinatorial::{best_superarm, best_superarm_containing, ActionFamily, SuperArm};

use super::{EnvError, RewardModel};

/// A family together with arm means and everything derived from them.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    family: ActionFamily,
    rewards: RewardModel,
    optimal: SuperArm,
    optimal_value: f64,
    arm_gaps: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(family: ActionFamily, rewards: RewardModel) -> Result<Self, EnvError> {
        family.validate()?;
        if rewards.arms() != family.arms() {
            return Err(EnvError::ArmCountMismatch {
                family: family.arms(),
                means: rewards.arms(),
            });
        }
        let means = rewards.means();
        let optimal = best_superarm(&family, means)?;
        let optimal_value = optimal.weight(means);
        let arm_gaps = (0..family.arms())
            .map(|i| {
                best_superarm_containing(&family, means, i)
                    .map(|z| (optimal_value - z.weight(means)).max(0.0))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            family,
            rewards,
            optimal,
            optimal_value,
            arm_gaps,
        })
    }

    /// The benchmark m-set instance: `size` optimal arms with mean
    /// `1/2 + gap` and all others at `1/2 - gap`.
    ///
    /// The optimal arms sit at the highest indices so that lexicographic
    /// tie-breaking in the learners never lands on the optimum by accident.
    pub fn m_set_benchmark(arms: usize, size: usize, gap: f64) -> Result<Self, EnvError> {
        if !(gap > 0.0 && gap <= 0.5) {
            return Err(EnvError::InvalidGap(gap));
        }
        let means = (0..arms)
            .map(|i| if i + size >= arms { 0.5 + gap } else { 0.5 - gap })
            .collect();
        Self::new(ActionFamily::m_set(arms, size), RewardModel::new(means)?)
    }

    pub fn family(&self) -> &ActionFamily {
        &self.family
    }

    pub fn rewards(&self) -> &RewardModel {
        &self.rewards
    }

    pub fn means(&self) -> &[f64] {
        self.rewards.means()
    }

    pub fn arms(&self) -> usize {
        self.family.arms()
    }

    pub fn max_size(&self) -> usize {
        self.family.max_size()
    }

    /// `Z*`.
    pub fn optimal(&self) -> &SuperArm {
        &self.optimal
    }

    /// `mu(Z*)`.
    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    /// `mu(Z)`.
    #[inline]
    pub fn value(&self, z: &SuperArm) -> f64 {
        z.weight(self.rewards.means())
    }

    /// `Delta(Z) = mu(Z*) - mu(Z)`.
    #[inline]
    pub fn superarm_gap(&self, z: &SuperArm) -> f64 {
        self.optimal_value - self.value(z)
    }

    /// Per-arm gaps `Delta_i`.
    pub fn arm_gaps(&self) -> &[f64] {
        &self.arm_gaps
    }

    /// Smallest strictly positive arm gap.
    pub fn min_gap(&self) -> Option<f64> {
        self.arm_gaps
            .iter()
            .copied()
            .filter(|&g| g > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Whether `Z*` is the only super-arm attaining `mu(Z*)`.
    pub fn has_unique_optimum(&self) -> Result<bool, EnvError> {
        match &self.family {
            ActionFamily::MSet { arms, size } => {
                if size == arms {
                    return Ok(true);
                }
                let mut sorted = self.means().to_vec();
                sorted.sort_by(|a, b| b.total_cmp(a));
                Ok(sorted[*size - 1] > sorted[*size])
            }
            ActionFamily::Matroid(_) => {
                let all = self.family.enumerate(None)?;
                let ties = all
                    .iter()
                    .filter(|z| self.value(z) >= self.optimal_value)
                    .count();
                Ok(ties == 1)
            }
        }
    }
}

/// Probability that a uniformly random feasible super-arm is `Z*`.
pub fn compute_p0(instance: &ProblemInstance) -> Result<f64, EnvError> {
    if !instance.has_unique_optimum()? {
        return Err(EnvError::NonUniqueOptimum);
    }
    Ok(1.0 / instance.family().feasible_count() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::Matroid;

    #[test]
    fn benchmark_instance_gaps() {
        let inst = ProblemInstance::m_set_benchmark(7, 3, 0.1).unwrap();
        assert_eq!(inst.optimal(), &SuperArm::new([4, 5, 6]));
        approx::assert_relative_eq!(inst.optimal_value(), 1.8, epsilon = 1e-12);
        for i in 0..4 {
            approx::assert_relative_eq!(inst.arm_gaps()[i], 0.2, epsilon = 1e-12);
        }
        for i in 4..7 {
            assert_eq!(inst.arm_gaps()[i], 0.0);
        }
        approx::assert_relative_eq!(inst.min_gap().unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn superarm_gaps_are_non_negative() {
        let inst = ProblemInstance::m_set_benchmark(6, 2, 0.2).unwrap();
        for z in inst.family().enumerate(None).unwrap() {
            assert!(inst.superarm_gap(&z) >= 0.0);
        }
    }

    #[test]
    fn p0_examples() {
        let mab = ProblemInstance::m_set_benchmark(10, 1, 0.1).unwrap();
        approx::assert_relative_eq!(compute_p0(&mab).unwrap(), 0.1);
        let cmab = ProblemInstance::m_set_benchmark(7, 3, 0.1).unwrap();
        approx::assert_relative_eq!(compute_p0(&cmab).unwrap(), 1.0 / 35.0);
        let full = ProblemInstance::m_set_benchmark(2, 2, 0.1).unwrap();
        assert_eq!(compute_p0(&full).unwrap(), 1.0);
    }

    #[test]
    fn tied_optimum_is_a_configuration_error() {
        let tied = ProblemInstance::new(
            ActionFamily::m_set(3, 1),
            RewardModel::new(vec![0.7, 0.7, 0.1]).unwrap(),
        )
        .unwrap();
        assert_eq!(compute_p0(&tied), Err(EnvError::NonUniqueOptimum));

        let part = Matroid::partition(4, vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let inst = ProblemInstance::new(
            ActionFamily::Matroid(part),
            RewardModel::new(vec![0.9, 0.1, 0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert_eq!(compute_p0(&inst), Err(EnvError::NonUniqueOptimum));
    }
}
