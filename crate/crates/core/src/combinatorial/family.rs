use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{OracleError, SuperArm};

/// Largest number of feasible super-arms any enumeration is allowed to touch.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// A matroid over `arms` ground elements whose bases form the action family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matroid {
    arms: usize,
    kind: MatroidKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MatroidKind {
    /// Any set of at most `rank` elements is independent.
    Uniform { rank: usize },
    /// Ground set split into disjoint blocks; at most `capacity[b]` elements
    /// may be taken from block `b`.
    Partition {
        blocks: Vec<Vec<usize>>,
        capacity: Vec<usize>,
    },
}

impl Matroid {
    pub fn uniform(arms: usize, rank: usize) -> Result<Self, OracleError> {
        if rank == 0 || rank > arms {
            return Err(OracleError::InvalidMatroid(format!(
                "uniform matroid needs 1 <= rank <= {arms}, got {rank}"
            )));
        }
        Ok(Self {
            arms,
            kind: MatroidKind::Uniform { rank },
        })
    }

    /// Builds a partition matroid. `blocks` must partition `0..arms`.
    pub fn partition(
        arms: usize,
        blocks: Vec<Vec<usize>>,
        capacity: Vec<usize>,
    ) -> Result<Self, OracleError> {
        if blocks.len() != capacity.len() {
            return Err(OracleError::InvalidMatroid(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacity.len()
            )));
        }
        let mut seen = vec![false; arms];
        for block in &blocks {
            for &arm in block {
                if arm >= arms {
                    return Err(OracleError::ArmOutOfRange { arm, arms });
                }
                if std::mem::replace(&mut seen[arm], true) {
                    return Err(OracleError::InvalidMatroid(format!(
                        "arm {arm} appears in two blocks"
                    )));
                }
            }
        }
        if let Some(arm) = seen.iter().position(|s| !s) {
            return Err(OracleError::InvalidMatroid(format!(
                "arm {arm} belongs to no block"
            )));
        }
        let matroid = Self {
            arms,
            kind: MatroidKind::Partition { blocks, capacity },
        };
        if matroid.rank() == 0 {
            return Err(OracleError::InvalidMatroid("rank is zero".into()));
        }
        Ok(matroid)
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn rank(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { rank } => *rank,
            MatroidKind::Partition { blocks, capacity } => blocks
                .iter()
                .zip(capacity)
                .map(|(b, &c)| b.len().min(c))
                .sum(),
        }
    }

    /// Independence test for an arbitrary (not necessarily sorted) arm list.
    pub fn is_independent(&self, set: &[usize]) -> Result<bool, OracleError> {
        for &arm in set {
            if arm >= self.arms {
                return Err(OracleError::ArmOutOfRange {
                    arm,
                    arms: self.arms,
                });
            }
        }
        match &self.kind {
            MatroidKind::Uniform { rank } => Ok(set.len() <= *rank),
            MatroidKind::Partition { blocks, capacity } => {
                for (block, &cap) in blocks.iter().zip(capacity) {
                    if set.iter().filter(|a| block.contains(a)).count() > cap {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn basis_count(&self) -> u128 {
        match &self.kind {
            MatroidKind::Uniform { rank } => binomial(self.arms, *rank),
            MatroidKind::Partition { blocks, capacity } => blocks
                .iter()
                .zip(capacity)
                .map(|(b, &c)| binomial(b.len(), c.min(b.len())))
                .product(),
        }
    }
}

/// The combinatorial family of feasible super-arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionFamily {
    /// All subsets of exactly `size` arms out of `arms`.
    MSet { arms: usize, size: usize },
    /// All bases of a matroid.
    Matroid(Matroid),
}

impl ActionFamily {
    pub fn m_set(arms: usize, size: usize) -> Self {
        ActionFamily::MSet { arms, size }
    }

    /// Number of base arms `K`.
    pub fn arms(&self) -> usize {
        match self {
            ActionFamily::MSet { arms, .. } => *arms,
            ActionFamily::Matroid(m) => m.arms(),
        }
    }

    /// Maximum super-arm cardinality `d`.
    pub fn max_size(&self) -> usize {
        match self {
            ActionFamily::MSet { size, .. } => *size,
            ActionFamily::Matroid(m) => m.rank(),
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        match self {
            ActionFamily::MSet { arms, size } if *arms == 0 || *size == 0 || size > arms => {
                Err(OracleError::EmptyFamily)
            }
            ActionFamily::Matroid(m) if m.arms() == 0 || m.rank() == 0 => {
                Err(OracleError::EmptyFamily)
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, z: &SuperArm) -> bool {
        if z.members().iter().any(|&a| a >= self.arms()) {
            return false;
        }
        match self {
            ActionFamily::MSet { size, .. } => z.len() == *size,
            ActionFamily::Matroid(m) => {
                z.len() == m.rank() && m.is_independent(z.members()).unwrap_or(false)
            }
        }
    }

    /// Total number of feasible super-arms, saturating at `u128::MAX`.
    pub fn feasible_count(&self) -> u128 {
        match self {
            ActionFamily::MSet { arms, size } => binomial(*arms, *size),
            ActionFamily::Matroid(m) => m.basis_count(),
        }
    }

    /// Lists every feasible super-arm (optionally only those containing
    /// `required`) in lexicographic order.
    pub fn enumerate(&self, required: Option<usize>) -> Result<Vec<SuperArm>, OracleError> {
        self.validate()?;
        let count = self.feasible_count();
        if count > ENUMERATION_BUDGET {
            return Err(OracleError::EnumerationBudget {
                count,
                budget: ENUMERATION_BUDGET,
            });
        }
        let (arms, size) = (self.arms(), self.max_size());
        if let Some(i) = required {
            if i >= arms {
                return Err(OracleError::ArmOutOfRange { arm: i, arms });
            }
        }
        let mut out = Vec::new();
        for combo in (0..arms).combinations(size) {
            if let Some(i) = required {
                if !combo.contains(&i) {
                    continue;
                }
            }
            let feasible = match self {
                ActionFamily::MSet { .. } => true,
                ActionFamily::Matroid(m) => m.is_independent(&combo)?,
            };
            if feasible {
                out.push(SuperArm::new(combo));
            }
        }
        Ok(out)
    }
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(10, 1), 10);
        assert_eq!(binomial(2, 2), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(100, 3), 161_700);
    }

    #[test]
    fn m_set_membership_requires_exact_size() {
        let fam = ActionFamily::m_set(4, 2);
        assert!(fam.contains(&SuperArm::new([0, 3])));
        assert!(!fam.contains(&SuperArm::new([0])));
        assert!(!fam.contains(&SuperArm::new([0, 4])));
        assert_eq!(fam.enumerate(None).unwrap().len(), 6);
        assert_eq!(fam.enumerate(Some(1)).unwrap().len(), 3);
    }

    #[test]
    fn empty_family_is_rejected() {
        assert_eq!(
            ActionFamily::m_set(0, 1).validate(),
            Err(OracleError::EmptyFamily)
        );
    }

    #[test]
    fn partition_matroid_validation() {
        assert!(Matroid::partition(4, vec![vec![0, 1], vec![2]], vec![1, 1]).is_err());
        assert!(Matroid::partition(3, vec![vec![0, 1], vec![1, 2]], vec![1, 1]).is_err());
        let m = Matroid::partition(4, vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        assert_eq!(m.rank(), 2);
        assert!(m.is_independent(&[0, 3]).unwrap());
        assert!(!m.is_independent(&[0, 1]).unwrap());
        assert!(m.is_independent(&[7]).is_err());
        let fam = ActionFamily::Matroid(m);
        assert_eq!(fam.feasible_count(), 4);
        assert_eq!(fam.enumerate(None).unwrap().len(), 4);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let fam = ActionFamily::m_set(100, 5);
        assert!(matches!(
            fam.enumerate(None),
            Err(OracleError::EnumerationBudget { .. })
        ));
    }
}
