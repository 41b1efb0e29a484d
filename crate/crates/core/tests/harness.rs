use rand::Rng;
use semibandit::algorithms::{Feedback, Policy, PolicyError, PolicyKind, PolicyRng};
use semibandit::combinatorial::{OracleStats, SuperArm};
use semibandit::environment::{Heuristic, ProblemInstance};
use semibandit::harness::{
    emit_csv, run_experiment, run_with_policy, write_csv, ExperimentSpec, HarnessError,
    HeuristicSet, RunRecord, RunSetup,
};

/// Plays a fixed script of super-arms, cycling.
struct Scripted {
    script: Vec<SuperArm>,
    next: usize,
}

impl Policy for Scripted {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn select(&mut self, _t: u64, rng: &mut PolicyRng) -> Result<SuperArm, PolicyError> {
        let _: u32 = rng.gen();
        let z = self.script[self.next % self.script.len()].clone();
        self.next += 1;
        Ok(z)
    }

    fn observe(&mut self, _feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        Ok(())
    }

    fn oracle_stats(&self) -> OracleStats {
        OracleStats::default()
    }
}

fn setup(horizon: u64) -> RunSetup {
    RunSetup {
        horizon,
        budget: 0.0,
        heuristic: Heuristic::None,
        seed: 0,
        alpha: 1.0,
        p0: None,
    }
}

fn strip_time(mut r: RunRecord) -> RunRecord {
    r.wall_ms = 0.0;
    r
}

#[test]
fn optimal_and_worst_dummies() {
    let inst = ProblemInstance::m_set_benchmark(2, 1, 0.5).unwrap();
    let mut best = Scripted {
        script: vec![SuperArm::single(1)],
        next: 0,
    };
    let r = run_with_policy(&inst, &mut best, &setup(1000)).unwrap();
    assert_eq!(r.final_regret, 0.0);
    let mut worst = Scripted {
        script: vec![SuperArm::single(0)],
        next: 0,
    };
    let r = run_with_policy(&inst, &mut worst, &setup(1000)).unwrap();
    assert_eq!(r.final_regret, 1000.0);
}

#[test]
fn scripted_regret_matches_hand_count() {
    // Gaps: {4,5} optimal, {0,5} and {3,4} cost 0.5 each at delta = 0.25.
    let inst = ProblemInstance::m_set_benchmark(6, 2, 0.25).unwrap();
    let script = vec![
        SuperArm::new([4, 5]),
        SuperArm::new([0, 5]),
        SuperArm::new([3, 4]),
        SuperArm::new([0, 1]),
    ];
    let mut p = Scripted { script, next: 0 };
    let r = run_with_policy(&inst, &mut p, &setup(400)).unwrap();
    // 100 cycles of 0 + 0.5 + 0.5 + 1.0.
    assert_eq!(r.final_regret, 200.0);
    assert_eq!(r.checkpoints, vec![(100, 50.0), (400, 200.0)]);
}

#[test]
fn infeasible_actions_are_rejected() {
    let inst = ProblemInstance::m_set_benchmark(4, 2, 0.1).unwrap();
    let mut p = Scripted {
        script: vec![SuperArm::single(0)],
        next: 0,
    };
    let err = run_with_policy(&inst, &mut p, &setup(10)).unwrap_err();
    assert!(err.is_invariant());
}

fn small_spec(policy: PolicyKind, budget: f64) -> ExperimentSpec {
    ExperimentSpec {
        arms: 7,
        d: 3,
        delta: 0.1,
        horizon: 50_000,
        budget,
        policy,
        heuristic: HeuristicSet::Both,
        repeats: 4,
        seed: 10,
        ..ExperimentSpec::default()
    }
}

#[test]
fn same_seed_same_record_in_parallel_and_serial() {
    for policy in [PolicyKind::Cbarbar, PolicyKind::Combucb1] {
        let serial = ExperimentSpec {
            workers: Some(1),
            ..small_spec(policy, 300.0)
        };
        let parallel = ExperimentSpec {
            workers: Some(3),
            ..small_spec(policy, 300.0)
        };
        let a: Vec<_> = run_experiment(&serial).unwrap().records.into_iter().map(strip_time).collect();
        let b: Vec<_> = run_experiment(&parallel).unwrap().records.into_iter().map(strip_time).collect();
        let c: Vec<_> = run_experiment(&serial).unwrap().records.into_iter().map(strip_time).collect();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.len(), 8);
    }
}

#[test]
fn zero_budget_heuristics_coincide() {
    let result = run_experiment(&ExperimentSpec {
        repeats: 1,
        ..small_spec(PolicyKind::Cbarbar, 0.0)
    })
    .unwrap();
    let report = &result.report;
    assert_eq!(report.per_heuristic.len(), 2);
    assert_eq!(report.per_heuristic[0].mean_regret, report.per_heuristic[1].mean_regret);
    assert_eq!(report.max_over_heuristics, report.per_heuristic[0].mean_regret);
}

#[test]
fn paired_max_dominates_each_heuristic() {
    let result = run_experiment(&small_spec(PolicyKind::Cbarbar, 500.0)).unwrap();
    let report = &result.report;
    let mut manual = 0.0;
    for seed in 10..14 {
        let per_seed = result
            .records
            .iter()
            .filter(|r| r.seed == seed)
            .map(|r| r.final_regret)
            .fold(f64::NEG_INFINITY, f64::max);
        manual += per_seed / 4.0;
    }
    approx::assert_relative_eq!(report.max_over_heuristics, manual, max_relative = 1e-12);
    for h in &report.per_heuristic {
        assert!(report.max_over_heuristics >= h.mean_regret);
        assert!(h.mean_corruption_spent <= 500.0);
    }
}

#[test]
fn csv_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    let spec = ExperimentSpec {
        out: Some(path.clone()),
        horizon: 20_000,
        ..small_spec(PolicyKind::Cbarbar, 100.0)
    };
    let result = run_experiment(&spec).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,heuristic,final_regret,oracle_calls_unconstrained,oracle_calls_constrained,wall_ms,regret@1e2,regret@1e3,regret@1e4,regret@20000"
    );
    let mut reader = csv::Reader::from_path(&path).unwrap();
    for (row, record) in reader.records().zip(&result.records) {
        let row = row.unwrap();
        assert_eq!(row[0].parse::<u64>().unwrap(), record.seed);
        assert_eq!(row[1].to_string(), record.heuristic.to_string());
        assert_eq!(row[2].parse::<f64>().unwrap(), record.final_regret);
        assert_eq!(row[9].parse::<f64>().unwrap(), record.checkpoints[3].1);
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    emit_csv(&result.records, &mut first).unwrap();
    emit_csv(&result.records, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn zero_regret_row_and_io_errors() {
    let inst = ProblemInstance::m_set_benchmark(2, 1, 0.5).unwrap();
    let mut best = Scripted {
        script: vec![SuperArm::single(1)],
        next: 0,
    };
    let r = run_with_policy(&inst, &mut best, &setup(100)).unwrap();
    let mut buf = Vec::new();
    emit_csv(std::slice::from_ref(&r), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);

    let missing = std::path::Path::new("/nonexistent-dir/x.csv");
    match write_csv(&[r], missing) {
        Err(HarnessError::Io { path, .. }) => assert_eq!(path, missing),
        other => panic!("{other:?}"),
    }
}
