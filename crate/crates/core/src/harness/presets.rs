use crate::algorithms::PolicyKind;

use super::{run_experiment, AggregateReport, ExperimentSpec, HarnessError, HeuristicSet};

/// Parameter grid of one published results table.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePreset {
    pub name: &'static str,
    pub arms: usize,
    pub d: usize,
    pub delta: f64,
    pub horizon: u64,
    pub budgets: Vec<f64>,
    pub policies: Vec<PolicyKind>,
}

impl TablePreset {
    pub fn named(name: &str) -> Option<Self> {
        let (name, arms, d, delta, horizon, budgets, policies) = match name {
            "table1" => ("table1", 7, 3, 0.1, 10_000_000, vec![0.0, 6000.0, 30000.0], vec![PolicyKind::Cbarbar]),
            "table2" => ("table2", 100, 3, 0.3, 30_000_000, vec![0.0, 30000.0, 120000.0], vec![PolicyKind::Cbarbar]),
            "table3" => (
                "table3",
                10,
                1,
                0.1,
                10_000_000,
                vec![0.0, 6000.0, 30000.0],
                vec![PolicyKind::Cbarbar, PolicyKind::Tsallis],
            ),
            "table4" => (
                "table4",
                100,
                1,
                0.3,
                10_000_000,
                vec![0.0, 6000.0, 30000.0],
                vec![PolicyKind::Cbarbar, PolicyKind::Tsallis],
            ),
            _ => return None,
        };
        Some(Self {
            name,
            arms,
            d,
            delta,
            horizon,
            budgets,
            policies,
        })
    }

    /// One experiment per `(policy, budget)` cell, in row order.
    pub fn specs(&self, repeats: u64, seed: u64, workers: Option<usize>) -> Vec<ExperimentSpec> {
        let mut specs = Vec::new();
        for &policy in &self.policies {
            for &budget in &self.budgets {
                specs.push(ExperimentSpec {
                    arms: self.arms,
                    d: self.d,
                    delta: self.delta,
                    horizon: self.horizon,
                    budget,
                    policy,
                    heuristic: HeuristicSet::Both,
                    repeats,
                    seed,
                    workers,
                    ..ExperimentSpec::default()
                });
            }
        }
        specs
    }
}

/// Runs a preset grid and returns one report per cell.
pub fn table_command(
    name: &str,
    repeats: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<AggregateReport>, HarnessError> {
    let preset = TablePreset::named(name)
        .ok_or_else(|| HarnessError::Config(format!("unknown table preset `{name}`")))?;
    preset
        .specs(repeats, seed, workers)
        .iter()
        .map(|spec| run_experiment(spec).map(|r| r.report))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let t3 = TablePreset::named("table3").unwrap();
        assert_eq!((t3.arms, t3.d, t3.horizon), (10, 1, 10_000_000));
        assert_eq!(t3.policies, vec![PolicyKind::Cbarbar, PolicyKind::Tsallis]);
        assert_eq!(t3.specs(2, 0, None).len(), 6);
        let t2 = TablePreset::named("table2").unwrap();
        assert_eq!(t2.budgets, vec![0.0, 30000.0, 120000.0]);
        assert_eq!(t2.policies, vec![PolicyKind::Cbarbar]);
        let t4 = TablePreset::named("table4").unwrap();
        assert_eq!((t4.arms, t4.delta), (100, 0.3));
        assert!(TablePreset::named("table5").is_none());
    }
}
