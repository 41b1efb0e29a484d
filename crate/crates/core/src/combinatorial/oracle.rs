use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{ActionFamily, Matroid, OracleError, SuperArm};

/// Per-oracle query counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub call_count_unconstrained: u64,
    pub call_count_constrained: u64,
}

impl OracleStats {
    pub fn total(&self) -> u64 {
        self.call_count_unconstrained + self.call_count_constrained
    }
}

/// Answers the two weighted queries over a combinatorial family:
/// the maximum-weight super-arm, and the maximum-weight super-arm that
/// contains a given arm. Approximate oracles only promise `alpha` times
/// the optimum.
pub trait WeightedOracle: Send {
    fn family(&self) -> &ActionFamily;

    fn best(&mut self, weights: &[f64]) -> Result<SuperArm, OracleError>;

    fn best_containing(&mut self, weights: &[f64], arm: usize) -> Result<SuperArm, OracleError>;

    fn stats(&self) -> OracleStats;

    /// Approximation ratio; 1 for exact oracles.
    fn alpha(&self) -> f64 {
        1.0
    }
}

/// Exact oracle: sorting for m-sets, greedy for matroids.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    family: ActionFamily,
    stats: OracleStats,
}

impl ExactOracle {
    pub fn new(family: ActionFamily) -> Result<Self, OracleError> {
        family.validate()?;
        Ok(Self {
            family,
            stats: OracleStats::default(),
        })
    }
}

impl WeightedOracle for ExactOracle {
    fn family(&self) -> &ActionFamily {
        &self.family
    }

    fn best(&mut self, weights: &[f64]) -> Result<SuperArm, OracleError> {
        let z = best_superarm(&self.family, weights)?;
        self.stats.call_count_unconstrained += 1;
        Ok(z)
    }

    fn best_containing(&mut self, weights: &[f64], arm: usize) -> Result<SuperArm, OracleError> {
        let z = best_superarm_containing(&self.family, weights, arm)?;
        self.stats.call_count_constrained += 1;
        Ok(z)
    }

    fn stats(&self) -> OracleStats {
        self.stats
    }
}

pub(crate) fn check_weights(family: &ActionFamily, weights: &[f64]) -> Result<(), OracleError> {
    family.validate()?;
    if weights.len() != family.arms() {
        return Err(OracleError::WeightLength {
            expected: family.arms(),
            got: weights.len(),
        });
    }
    if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
        return Err(OracleError::NonFiniteWeight { index });
    }
    Ok(())
}

/// Heaviest arm first; equal weights resolved towards the smaller index.
fn by_weight_then_index(weights: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b))
}

/// Exact maximum-weight super-arm, ties broken towards the lexicographically
/// smallest member list. Does not touch any call counter.
pub fn best_superarm(family: &ActionFamily, weights: &[f64]) -> Result<SuperArm, OracleError> {
    check_weights(family, weights)?;
    match family {
        ActionFamily::MSet { arms, size } => Ok(top_arms(weights, *arms, *size, None)),
        ActionFamily::Matroid(m) => matroid_greedy(m, weights, None),
    }
}

/// Exact maximum-weight super-arm containing `arm`.
pub fn best_superarm_containing(
    family: &ActionFamily,
    weights: &[f64],
    arm: usize,
) -> Result<SuperArm, OracleError> {
    check_weights(family, weights)?;
    if arm >= family.arms() {
        return Err(OracleError::ArmOutOfRange {
            arm,
            arms: family.arms(),
        });
    }
    match family {
        ActionFamily::MSet { arms, size } => Ok(top_arms(weights, *arms, *size, Some(arm))),
        ActionFamily::Matroid(m) => matroid_greedy(m, weights, Some(arm)),
    }
}

fn top_arms(weights: &[f64], arms: usize, size: usize, required: Option<usize>) -> SuperArm {
    let mut order: Vec<usize> = (0..arms).filter(|&a| Some(a) != required).collect();
    let take = size - usize::from(required.is_some());
    let cmp = by_weight_then_index(weights);
    if take < order.len() && take > 0 {
        order.select_nth_unstable_by(take - 1, &cmp);
    }
    order.truncate(take);
    SuperArm::new(order.into_iter().chain(required))
}

/// Greedy maximum-weight basis. With `required`, the greedy is seeded with
/// that arm, which yields the heaviest basis containing it.
pub fn matroid_greedy(
    matroid: &Matroid,
    weights: &[f64],
    required: Option<usize>,
) -> Result<SuperArm, OracleError> {
    if weights.len() != matroid.arms() {
        return Err(OracleError::WeightLength {
            expected: matroid.arms(),
            got: weights.len(),
        });
    }
    let rank = matroid.rank();
    let mut chosen: Vec<usize> = Vec::with_capacity(rank);
    if let Some(arm) = required {
        if !matroid.is_independent(&[arm])? {
            return Err(OracleError::InfeasibleConstraint { arm });
        }
        chosen.push(arm);
    }
    let mut order: Vec<usize> = (0..matroid.arms())
        .filter(|&a| Some(a) != required)
        .collect();
    order.sort_by(by_weight_then_index(weights));
    for arm in order {
        if chosen.len() == rank {
            break;
        }
        chosen.push(arm);
        if !matroid.is_independent(&chosen)? {
            chosen.pop();
        }
    }
    Ok(SuperArm::new(chosen))
}

/// Reference optimum by full enumeration. Keeps the first strict maximum in
/// lexicographic enumeration order, which matches the tie-break of the fast
/// oracles.
pub fn brute_force_best(
    family: &ActionFamily,
    weights: &[f64],
    required: Option<usize>,
) -> Result<SuperArm, OracleError> {
    check_weights(family, weights)?;
    let candidates = family.enumerate(required)?;
    let mut best: Option<(f64, SuperArm)> = None;
    for z in candidates {
        let w = z.weight(weights);
        match &best {
            Some((bw, _)) if w <= *bw => {}
            _ => best = Some((w, z)),
        }
    }
    best.map(|(_, z)| z).ok_or(match required {
        Some(arm) => OracleError::InfeasibleConstraint { arm },
        None => OracleError::EmptyFamily,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight_of(z: &SuperArm, w: &[f64]) -> f64 {
        z.weight(w)
    }

    #[test]
    fn unconstrained_m_set_examples() {
        let fam = ActionFamily::m_set(3, 2);
        let w = [3.0, 1.0, 2.0];
        let z = best_superarm(&fam, &w).unwrap();
        assert_eq!(z, SuperArm::new([0, 2]));
        assert_eq!(weight_of(&z, &w), 5.0);

        let all = ActionFamily::m_set(4, 4);
        assert_eq!(
            best_superarm(&all, &[0.3, -1.0, 7.0, 0.0]).unwrap(),
            SuperArm::new([0, 1, 2, 3])
        );

        assert_eq!(
            best_superarm(&fam, &[1.0, 1.0, 1.0]).unwrap(),
            SuperArm::new([0, 1])
        );
    }

    #[test]
    fn constrained_m_set_examples() {
        let fam = ActionFamily::m_set(3, 2);
        let w = [3.0, 1.0, 2.0];
        let z = best_superarm_containing(&fam, &w, 1).unwrap();
        assert_eq!(z, SuperArm::new([0, 1]));
        assert_eq!(weight_of(&z, &w), 4.0);
        assert_eq!(
            best_superarm_containing(&fam, &w, 0).unwrap(),
            SuperArm::new([0, 2])
        );
        let pair = ActionFamily::m_set(2, 2);
        assert_eq!(
            best_superarm_containing(&pair, &[-4.0, 9.0], 0).unwrap(),
            SuperArm::new([0, 1])
        );
    }

    #[test]
    fn brute_force_examples() {
        let fam = ActionFamily::m_set(3, 2);
        let w = [3.0, 1.0, 2.0];
        assert_eq!(brute_force_best(&fam, &w, None).unwrap(), SuperArm::new([0, 2]));
        assert_eq!(
            brute_force_best(&fam, &w, Some(1)).unwrap(),
            SuperArm::new([0, 1])
        );
    }

    #[test]
    fn matroid_examples() {
        let uniform = Matroid::uniform(3, 2).unwrap();
        assert_eq!(
            matroid_greedy(&uniform, &[3.0, 1.0, 2.0], None).unwrap(),
            SuperArm::new([0, 2])
        );
        let part = Matroid::partition(4, vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let w = [5.0, 1.0, 2.0, 9.0];
        assert_eq!(matroid_greedy(&part, &w, None).unwrap(), SuperArm::new([0, 3]));
        assert_eq!(
            matroid_greedy(&part, &w, Some(1)).unwrap(),
            SuperArm::new([1, 3])
        );
    }

    #[test]
    fn infeasible_constraint_is_reported() {
        let part = Matroid::partition(3, vec![vec![0, 1], vec![2]], vec![1, 0]).unwrap();
        assert_eq!(
            matroid_greedy(&part, &[1.0, 1.0, 1.0], Some(2)),
            Err(OracleError::InfeasibleConstraint { arm: 2 })
        );
        let fam = ActionFamily::Matroid(part);
        assert_eq!(
            brute_force_best(&fam, &[1.0, 1.0, 1.0], Some(2)),
            Err(OracleError::InfeasibleConstraint { arm: 2 })
        );
    }

    #[test]
    fn bad_weights_are_rejected() {
        let fam = ActionFamily::m_set(3, 2);
        assert!(matches!(
            best_superarm(&fam, &[1.0, f64::NAN, 0.0]),
            Err(OracleError::NonFiniteWeight { index: 1 })
        ));
        assert!(matches!(
            best_superarm(&fam, &[1.0]),
            Err(OracleError::WeightLength { .. })
        ));
        assert_eq!(
            best_superarm(&ActionFamily::m_set(0, 1), &[]),
            Err(OracleError::EmptyFamily)
        );
    }

    #[test]
    fn exact_oracle_counts_each_query_once() {
        let mut oracle = ExactOracle::new(ActionFamily::m_set(5, 2)).unwrap();
        let w = [0.1, 0.5, 0.2, 0.9, 0.0];
        oracle.best(&w).unwrap();
        oracle.best(&w).unwrap();
        oracle.best_containing(&w, 4).unwrap();
        assert_eq!(
            oracle.stats(),
            OracleStats {
                call_count_unconstrained: 2,
                call_count_constrained: 1
            }
        );
    }
}
