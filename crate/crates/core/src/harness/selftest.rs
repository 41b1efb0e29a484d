use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{PolicyConfig, PolicyKind};
use crate::combinatorial::{
    best_superarm, best_superarm_containing, brute_force_best, ActionFamily, Matroid,
};
use crate::environment::{Heuristic, ProblemInstance};

use super::{run_one, RunSetup};

/// Outcome of each self-check: `(name, passed, detail)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<(String, bool, String)>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    fn push(&mut self, name: impl Into<String>, result: Result<String, String>) {
        match result {
            Ok(detail) => self.checks.push((name.into(), true, detail)),
            Err(detail) => self.checks.push((name.into(), false, detail)),
        }
    }
}

fn oracle_agreement(family: &ActionFamily, trials: usize, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let k = family.arms();
    for trial in 0..trials {
        // Coarse grid so that ties actually occur.
        let w: Vec<f64> = (0..k).map(|_| f64::from(rng.gen_range(-4i32..=4)) / 4.0).collect();
        let fast = best_superarm(family, &w).map_err(|e| e.to_string())?;
        let slow = brute_force_best(family, &w, None).map_err(|e| e.to_string())?;
        if fast != slow {
            return Err(format!("trial {trial}: {fast} vs {slow} for {w:?}"));
        }
        let arm = rng.gen_range(0..k);
        let fast = best_superarm_containing(family, &w, arm);
        let slow = brute_force_best(family, &w, Some(arm));
        match (fast, slow) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(_), Err(_)) => {}
            (a, b) => return Err(format!("trial {trial}, arm {arm}: {a:?} vs {b:?}")),
        }
    }
    Ok(format!("{trials} weight vectors"))
}

fn short_runs(kind: PolicyKind, instance: &ProblemInstance, horizon: u64, alpha: f64) -> Result<String, String> {
    let mut policy = PolicyConfig::new(kind);
    if kind == PolicyKind::CbarApx {
        policy.alpha = alpha;
        policy.lambda = Some(1.0);
    }
    if kind == PolicyKind::CbarbarTheoretical {
        policy.lambda = Some(2.0);
    }
    let mut epochs = 0;
    for heuristic in [Heuristic::None, Heuristic::Begin, Heuristic::Suppress] {
        let setup = RunSetup {
            horizon,
            budget: 200.0,
            heuristic,
            seed: 7,
            alpha,
            p0: None,
        };
        let first = run_one(instance, &policy, &setup).map_err(|e| e.to_string())?;
        let second = run_one(instance, &policy, &setup).map_err(|e| e.to_string())?;
        if first.final_regret != second.final_regret || first.checkpoints != second.checkpoints {
            return Err(format!("{heuristic}: repeated run differs"));
        }
        epochs += first.completed_epochs();
    }
    Ok(format!("3 heuristics, {epochs} completed epochs"))
}

/// Runs the oracle, policy and harness invariant suites on small instances.
pub fn selftest() -> SelftestReport {
    let mut report = SelftestReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (k, d) in [(6, 1), (8, 3), (7, 4)] {
        report.push(
            format!("oracle m-set K={k} d={d}"),
            oracle_agreement(&ActionFamily::m_set(k, d), 200, &mut rng),
        );
    }
    let partition = Matroid::partition(6, vec![vec![0, 1, 2], vec![3, 4], vec![5]], vec![2, 1, 1])
        .map(ActionFamily::Matroid);
    report.push(
        "oracle partition matroid",
        partition
            .map_err(|e| e.to_string())
            .and_then(|f| oracle_agreement(&f, 200, &mut rng)),
    );

    let cases = [
        (PolicyKind::Cbarbar, 7, 3, 1.0),
        (PolicyKind::Cbarbar, 10, 1, 1.0),
        (PolicyKind::CbarbarTheoretical, 5, 2, 1.0),
        (PolicyKind::Tsallis, 5, 1, 1.0),
        (PolicyKind::Combucb1, 7, 3, 1.0),
        (PolicyKind::CbarApx, 7, 3, 0.8),
    ];
    for (kind, k, d, alpha) in cases {
        let name = format!("{} K={k} d={d}", kind.label());
        let result = ProblemInstance::m_set_benchmark(k, d, 0.1)
            .map_err(|e| e.to_string())
            .and_then(|inst| short_runs(kind, &inst, 20_000, alpha));
        report.push(name, result);
    }
    report
}
