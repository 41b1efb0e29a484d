use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::environment::Heuristic;

use super::{run_one, ExperimentSpec, HarnessError, RunRecord, RunSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSummary {
    pub heuristic: Heuristic,
    pub runs: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_oracle_calls: f64,
    pub mean_wall_ms: f64,
    pub mean_corruption_spent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub policy: String,
    pub budget: f64,
    pub horizon: u64,
    pub per_heuristic: Vec<HeuristicSummary>,
    /// Mean over seeds of the largest final regret among the heuristics.
    pub max_over_heuristics: f64,
    pub max_over_heuristics_std: f64,
    pub mean_oracle_calls: f64,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub report: AggregateReport,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn mean_of(records: &[&RunRecord], f: impl Fn(&RunRecord) -> f64) -> f64 {
    records.iter().map(|r| f(r)).sum::<f64>() / records.len() as f64
}

/// Summarises runs of one policy and budget. Heuristics are listed in
/// first-seen order; the maximum is taken per seed over every heuristic
/// that ran that seed.
pub fn aggregate(records: &[RunRecord]) -> AggregateReport {
    let mut order: Vec<Heuristic> = Vec::new();
    let mut by_seed: BTreeMap<u64, f64> = BTreeMap::new();
    for r in records {
        if !order.contains(&r.heuristic) {
            order.push(r.heuristic);
        }
        let slot = by_seed.entry(r.seed).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(r.final_regret);
    }
    let per_heuristic = order
        .iter()
        .map(|&h| {
            let group: Vec<&RunRecord> = records.iter().filter(|r| r.heuristic == h).collect();
            let regrets: Vec<f64> = group.iter().map(|r| r.final_regret).collect();
            let (mean_regret, std_regret) = mean_std(&regrets);
            HeuristicSummary {
                heuristic: h,
                runs: group.len(),
                mean_regret,
                std_regret,
                mean_oracle_calls: mean_of(&group, |r| r.oracle_calls.total() as f64),
                mean_wall_ms: mean_of(&group, |r| r.wall_ms),
                mean_corruption_spent: mean_of(&group, |r| r.corruption_spent),
            }
        })
        .collect();
    let maxima: Vec<f64> = by_seed.into_values().collect();
    let (max_over_heuristics, max_over_heuristics_std) = mean_std(&maxima);
    let all: Vec<&RunRecord> = records.iter().collect();
    AggregateReport {
        policy: records.first().map(|r| r.policy.clone()).unwrap_or_default(),
        budget: records.first().map_or(0.0, |r| r.budget),
        horizon: records.first().map_or(0, |r| r.horizon),
        per_heuristic,
        max_over_heuristics,
        max_over_heuristics_std,
        mean_oracle_calls: mean_of(&all, |r| r.oracle_calls.total() as f64),
        mean_wall_ms: mean_of(&all, |r| r.wall_ms),
    }
}

fn execute<T, F>(jobs: &[T], workers: Option<usize>, f: F) -> Result<Vec<RunRecord>, HarnessError>
where
    T: Sync,
    F: Fn(&T) -> Result<RunRecord, HarnessError> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != Some(1) {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        return pool.install(|| jobs.par_iter().map(&f).collect());
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    jobs.iter().map(f).collect()
}

/// Runs every `(heuristic, seed)` pair of the experiment. Seeds are shared
/// across heuristics, so each seed sees the same clean rewards under each
/// heuristic. Without a budget no heuristic can act, and one set of runs is
/// reported under every heuristic.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let instance = spec.instance()?;
    let policy = spec.policy_config();
    let heuristics = spec.heuristic.heuristics();
    let shared = spec.budget == 0.0;
    let run_heuristics = if shared { vec![Heuristic::None] } else { heuristics.clone() };
    let jobs: Vec<(Heuristic, u64)> = run_heuristics
        .iter()
        .flat_map(|&h| spec.seeds().map(move |s| (h, s)))
        .collect();
    let alpha = if spec.policy == crate::algorithms::PolicyKind::CbarApx {
        spec.alpha
    } else {
        1.0
    };
    let runs = execute(&jobs, spec.workers, |&(heuristic, seed)| {
        let setup = RunSetup {
            horizon: spec.horizon,
            budget: spec.budget,
            heuristic,
            seed,
            alpha,
            p0: spec.p0,
        };
        run_one(&instance, &policy, &setup)
    })?;
    let records = if shared {
        heuristics
            .iter()
            .flat_map(|&h| {
                runs.iter().map(move |r| RunRecord {
                    heuristic: h,
                    ..r.clone()
                })
            })
            .collect()
    } else {
        runs
    };
    let report = aggregate(&records);
    if let Some(path) = &spec.out {
        super::write_csv(&records, path)?;
    }
    Ok(ExperimentResult { records, report })
}
