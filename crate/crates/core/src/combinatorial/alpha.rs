use super::oracle::{best_superarm, best_superarm_containing, check_weights};
use super::{ActionFamily, OracleError, OracleStats, SuperArm, WeightedOracle};

/// Adversarially tight `alpha`-approximation oracle.
///
/// For every query it computes the exact optimum value `V` and answers with
/// the lightest feasible super-arm whose weight is still at least
/// `alpha * V` (ties to the lexicographically smallest). The feasible set is
/// enumerated once at construction, so this only works for small families.
#[derive(Debug, Clone)]
pub struct AlphaCapped {
    family: ActionFamily,
    alpha: f64,
    feasible: Vec<SuperArm>,
    stats: OracleStats,
}

impl AlphaCapped {
    pub fn new(family: ActionFamily, alpha: f64) -> Result<Self, OracleError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(OracleError::InvalidAlpha(alpha));
        }
        family.validate()?;
        let feasible = if alpha < 1.0 {
            family
                .enumerate(None)
                .map_err(|_| OracleError::UnsupportedApproximation {
                    count: family.feasible_count(),
                })?
        } else {
            Vec::new()
        };
        Ok(Self {
            family,
            alpha,
            feasible,
            stats: OracleStats::default(),
        })
    }

    fn lightest_above(&self, weights: &[f64], exact: SuperArm, required: Option<usize>) -> SuperArm {
        if self.alpha >= 1.0 {
            return exact;
        }
        let threshold = self.alpha * exact.weight(weights);
        let mut pick: Option<(f64, &SuperArm)> = None;
        for z in &self.feasible {
            if let Some(arm) = required {
                if !z.contains(arm) {
                    continue;
                }
            }
            let w = z.weight(weights);
            if w < threshold {
                continue;
            }
            match pick {
                Some((pw, _)) if w >= pw => {}
                _ => pick = Some((w, z)),
            }
        }
        // A negative optimum leaves nothing above alpha * V; fall back to it.
        pick.map(|(_, z)| z.clone()).unwrap_or(exact)
    }
}

impl WeightedOracle for AlphaCapped {
    fn family(&self) -> &ActionFamily {
        &self.family
    }

    fn best(&mut self, weights: &[f64]) -> Result<SuperArm, OracleError> {
        check_weights(&self.family, weights)?;
        let exact = best_superarm(&self.family, weights)?;
        let z = self.lightest_above(weights, exact, None);
        self.stats.call_count_unconstrained += 1;
        Ok(z)
    }

    fn best_containing(&mut self, weights: &[f64], arm: usize) -> Result<SuperArm, OracleError> {
        let exact = best_superarm_containing(&self.family, weights, arm)?;
        let z = self.lightest_above(weights, exact, Some(arm));
        self.stats.call_count_constrained += 1;
        Ok(z)
    }

    fn stats(&self) -> OracleStats {
        self.stats
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::ExactOracle;

    #[test]
    fn alpha_one_is_exact() {
        let fam = ActionFamily::m_set(5, 2);
        let w = [0.3, 0.9, 0.1, 0.7, 0.5];
        let mut capped = AlphaCapped::new(fam.clone(), 1.0).unwrap();
        let mut exact = ExactOracle::new(fam).unwrap();
        assert_eq!(capped.best(&w).unwrap(), exact.best(&w).unwrap());
        for i in 0..5 {
            assert_eq!(
                capped.best_containing(&w, i).unwrap(),
                exact.best_containing(&w, i).unwrap()
            );
        }
    }

    #[test]
    fn threshold_example() {
        let mut oracle = AlphaCapped::new(ActionFamily::m_set(3, 2), 0.8).unwrap();
        let w = [3.0, 1.0, 2.0];
        assert_eq!(oracle.best(&w).unwrap(), SuperArm::new([0, 1]));
    }

    #[test]
    fn equal_weights_pick_lexicographic_first() {
        let mut oracle = AlphaCapped::new(ActionFamily::m_set(3, 2), 0.5).unwrap();
        assert_eq!(oracle.best(&[1.0, 1.0, 1.0]).unwrap(), SuperArm::new([0, 1]));
    }

    #[test]
    fn rejects_bad_alpha_and_large_families() {
        assert!(matches!(
            AlphaCapped::new(ActionFamily::m_set(3, 2), 0.0),
            Err(OracleError::InvalidAlpha(_))
        ));
        assert!(matches!(
            AlphaCapped::new(ActionFamily::m_set(3, 2), 1.5),
            Err(OracleError::InvalidAlpha(_))
        ));
        assert!(matches!(
            AlphaCapped::new(ActionFamily::m_set(200, 5), 0.9),
            Err(OracleError::UnsupportedApproximation { .. })
        ));
        assert!(AlphaCapped::new(ActionFamily::m_set(200, 5), 1.0).is_ok());
    }

    #[test]
    fn counts_once_per_query() {
        let mut oracle = AlphaCapped::new(ActionFamily::m_set(4, 2), 0.7).unwrap();
        let w = [0.2, 0.4, 0.6, 0.8];
        oracle.best(&w).unwrap();
        oracle.best_containing(&w, 0).unwrap();
        oracle.best_containing(&w, 1).unwrap();
        assert_eq!(oracle.stats().call_count_unconstrained, 1);
        assert_eq!(oracle.stats().call_count_constrained, 2);
    }
}
