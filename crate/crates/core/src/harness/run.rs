use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Feedback, Policy, PolicyConfig, PolicyDiagnostics, PolicyRng, Setting};
use crate::combinatorial::OracleStats;
use crate::environment::{Adversary, CorruptionLedger, Heuristic, ProblemInstance, RewardStream};

use super::HarnessError;

const POLICY_STREAM: u64 = 1;
const ADVERSARY_STREAM: u64 = 2;

/// Everything about a run except the policy itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub horizon: u64,
    pub budget: f64,
    pub heuristic: Heuristic,
    pub seed: u64,
    /// Benchmark discount; `1` gives pseudo-regret, `< 1` gives alpha-regret.
    pub alpha: f64,
    pub p0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub heuristic: Heuristic,
    pub policy: String,
    pub budget: f64,
    pub horizon: u64,
    pub final_regret: f64,
    /// `(t, regret after round t)` at the checkpoint schedule.
    pub checkpoints: Vec<(u64, f64)>,
    pub oracle_calls: OracleStats,
    pub wall_ms: f64,
    pub corruption_spent: f64,
    pub corrupted_rounds: u64,
    pub diagnostics: PolicyDiagnostics,
}

impl RunRecord {
    /// Completed CBARBAR or CBAR-APX epochs.
    pub fn completed_epochs(&self) -> usize {
        let d = &self.diagnostics;
        d.epochs.iter().filter(|e| e.completed).count() + d.apx_epochs.len()
    }
}

/// `10^2, 10^3, ..` up to `horizon`, with `horizon` itself always last.
pub fn checkpoint_schedule(horizon: u64) -> Vec<u64> {
    let mut points: Vec<u64> = std::iter::successors(Some(100u64), |p| p.checked_mul(10))
        .take_while(|&p| p < horizon)
        .collect();
    points.push(horizon);
    points
}

/// Sum of the `d` largest absolute entries, by full sort.
fn ld_norm_by_sort(c: &[f64], d: usize) -> f64 {
    let mut abs: Vec<f64> = c.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    abs.iter().take(d).sum()
}

fn invariant(seed: u64, message: String) -> HarnessError {
    HarnessError::Invariant { seed, message }
}

/// Builds the policy described by `policy` and runs it.
pub fn run_one(
    instance: &ProblemInstance,
    policy: &PolicyConfig,
    setup: &RunSetup,
) -> Result<RunRecord, HarnessError> {
    let mut learner = policy
        .build(instance, setup.horizon)
        .map_err(|source| HarnessError::Run {
            seed: setup.seed,
            source,
        })?;
    let record = run_with_policy(instance, learner.as_mut(), setup)?;
    check_diagnostics(instance, &record)?;
    Ok(record)
}

/// Plays `policy` against the (possibly corrupted) environment for the
/// whole horizon and checks the per-round invariants.
pub fn run_with_policy(
    instance: &ProblemInstance,
    policy: &mut dyn Policy,
    setup: &RunSetup,
) -> Result<RunRecord, HarnessError> {
    let started = Instant::now();
    let seed = setup.seed;
    let family = instance.family();
    let model = instance.rewards();
    let means = instance.means();
    let k = instance.arms();
    let d = instance.max_size();
    let optimal = instance.optimal().clone();
    let benchmark = setup.alpha * instance.optimal_value();

    let mut ledger = CorruptionLedger::new(setup.budget, d, setup.horizon)?;
    let mut adversary = Adversary::new(setup.heuristic, instance, setup.p0)?;
    let stream = RewardStream::new(seed, k);
    let mut policy_rng = PolicyRng::seed_from_u64(seed);
    policy_rng.set_stream(POLICY_STREAM);
    let mut adversary_rng = ChaCha8Rng::seed_from_u64(seed);
    adversary_rng.set_stream(ADVERSARY_STREAM);

    let schedule = checkpoint_schedule(setup.horizon);
    let mut checkpoints = Vec::with_capacity(schedule.len());
    let mut next_checkpoint = 0;
    let mut clean = vec![0.0; k];
    let mut corrupted = vec![0.0; k];
    let mut diff = vec![0.0; k];
    let mut observed = Vec::with_capacity(d);
    let mut regret = 0.0;
    let mut recomputed_spend = 0.0;
    let wants_p = setup.heuristic == Heuristic::Suppress;

    for t in 1..=setup.horizon {
        let p = if wants_p {
            policy.probability_of(&optimal)
        } else {
            None
        };
        let corrupt = adversary.decide(&ledger, p);
        let z = policy
            .select(t, &mut policy_rng)
            .map_err(|source| HarnessError::Run { seed, source })?;
        if !family.contains(&z) {
            return Err(invariant(seed, format!("round {t}: infeasible action {z}")));
        }
        observed.clear();
        if corrupt {
            stream.fill_round(model, t, &mut clean);
            adversary.apply_swap(&mut ledger, &clean, &mut corrupted, &mut adversary_rng);
            for ((c, &a), &b) in diff.iter_mut().zip(&corrupted).zip(&clean) {
                *c = a - b;
            }
            recomputed_spend += ld_norm_by_sort(&diff, d);
            observed.extend(z.members().iter().map(|&i| corrupted[i]));
        } else {
            observed.extend(z.members().iter().map(|&i| stream.reward(model, t, i)));
        }
        policy
            .observe(&Feedback::new(t, &z, &observed))
            .map_err(|source| HarnessError::Run { seed, source })?;
        adversary.record_choice(z == optimal);
        regret += benchmark - z.weight(means);
        if t == schedule[next_checkpoint] {
            checkpoints.push((t, regret));
            next_checkpoint += 1;
        }
    }

    let spent = ledger.spent();
    if spent > ledger.budget() * (1.0 + 1e-12) {
        return Err(invariant(
            seed,
            format!("spent {spent} exceeds budget {}", ledger.budget()),
        ));
    }
    if (spent - recomputed_spend).abs() > 1e-9 * spent.max(1.0) {
        return Err(invariant(
            seed,
            format!("ledger says {spent} spent, corruption vectors sum to {recomputed_spend}"),
        ));
    }
    if setup.alpha == 1.0 {
        if let Some(w) = checkpoints.windows(2).find(|w| w[1].1 < w[0].1) {
            return Err(invariant(
                seed,
                format!("pseudo-regret fell from {} at t={} to {} at t={}", w[0].1, w[0].0, w[1].1, w[1].0),
            ));
        }
    }

    Ok(RunRecord {
        seed,
        heuristic: setup.heuristic,
        policy: policy.name().to_string(),
        budget: setup.budget,
        horizon: setup.horizon,
        final_regret: regret,
        checkpoints,
        oracle_calls: policy.oracle_stats(),
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        corruption_spent: spent,
        corrupted_rounds: ledger.corrupted_rounds(),
        diagnostics: policy.diagnostics(),
    })
}

/// Post-run checks on the epoch structure, oracle usage and solver
/// accuracy reported by the policy.
pub fn check_diagnostics(instance: &ProblemInstance, record: &RunRecord) -> Result<(), HarnessError> {
    let seed = record.seed;
    let diag = &record.diagnostics;
    let k = instance.arms() as u64;
    let horizon = record.horizon as f64;
    let calls = record.oracle_calls.total();

    if let Some(params) = &diag.cbarbar {
        let kf = k as f64;
        let d2 = (params.d * params.d) as f64;
        let mut previous: Option<&crate::algorithms::EpochRecord> = None;
        for e in &diag.epochs {
            let m = e.epoch;
            let growth = params.base.powf((m as f64 - 1.0) / 2.0);
            if e.q_sum_error > 1e-12 {
                return Err(invariant(seed, format!("epoch {m}: |sum q - 1| = {}", e.q_sum_error)));
            }
            if e.length != e.n_arms.iter().sum::<u64>() + e.n_star {
                return Err(invariant(seed, format!("epoch {m}: N differs from the sum of pulls")));
            }
            let arm_cap = (params.lambda * d2 * growth).ceil() as u64;
            if let Some(n) = e.n_arms.iter().find(|&&n| n > arm_cap) {
                return Err(invariant(seed, format!("epoch {m}: n_i = {n} above {arm_cap}")));
            }
            if e.oracle_calls > k + 1 {
                return Err(invariant(seed, format!("epoch {m}: {} oracle calls", e.oracle_calls)));
            }
            if params.setting == Setting::Cmab {
                let low = params.lambda * d2 * kf * growth;
                let n = e.length as f64;
                if n < low || n > 2.0 * low + kf + 1.0 {
                    return Err(invariant(
                        seed,
                        format!("epoch {m}: N = {n} outside [{low}, 2 * {low} + K]"),
                    ));
                }
            }
            if let Some(prev) = previous {
                if params.d == 1 && e.length > 4 * prev.length {
                    return Err(invariant(
                        seed,
                        format!("epoch {m}: N = {} more than 4x the previous {}", e.length, prev.length),
                    ));
                }
                let floor = params.base.powf(-(prev.epoch as f64) / 4.0);
                for (i, (&g, &g_prev)) in e.gaps.iter().zip(&prev.gaps).enumerate() {
                    if g < floor.max(g_prev / 2.0) {
                        return Err(invariant(seed, format!("epoch {m}: gap of arm {i} fell to {g}")));
                    }
                }
            }
            previous = Some(e);
        }
        let completed = diag.epochs.iter().filter(|e| e.completed).count() as f64;
        let epoch_cap = match params.setting {
            Setting::Cmab => 2.0 * (horizon / kf).log2(),
            Setting::Mab => 2.0 * horizon.log2(),
        };
        if completed > epoch_cap.max(0.0) {
            return Err(invariant(seed, format!("{completed} epochs exceed {epoch_cap}")));
        }
        if record.horizon >= 2 * k {
            let call_cap = 2.0 * (kf + 1.0) * 2.0 * (horizon / kf).log2();
            if calls as f64 > call_cap {
                return Err(invariant(seed, format!("{calls} oracle calls exceed {call_cap}")));
            }
        }
    }

    if !diag.apx_epochs.is_empty() || record.policy == "cbar-apx" {
        for e in &diag.apx_epochs {
            if e.incumbent_after < e.incumbent_before {
                return Err(invariant(
                    seed,
                    format!(
                        "epoch {}: incumbent value fell from {} to {}",
                        e.epoch, e.incumbent_before, e.incumbent_after
                    ),
                ));
            }
            if e.oracle_calls > 2 * e.alive_before as u64 + 1 || e.alive_after > e.alive_before {
                return Err(invariant(seed, format!("epoch {}: bad oracle or survivor count", e.epoch)));
            }
        }
        let call_cap = (2.0 * k as f64 + 1.0) * 2.0 * horizon.log2();
        if calls as f64 > call_cap {
            return Err(invariant(seed, format!("{calls} oracle calls exceed {call_cap}")));
        }
    }

    if let Some(residual) = diag.max_simplex_residual {
        if !(residual < 1e-10) {
            return Err(invariant(seed, format!("simplex residual {residual}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints() {
        assert_eq!(checkpoint_schedule(1000), vec![100, 1000]);
        assert_eq!(checkpoint_schedule(2500), vec![100, 1000, 2500]);
        assert_eq!(checkpoint_schedule(50), vec![50]);
    }

    #[test]
    fn sort_based_norm() {
        assert_eq!(ld_norm_by_sort(&[0.5, -1.0, 0.25, 0.75], 2), 1.75);
        assert_eq!(ld_norm_by_sort(&[0.5], 3), 0.5);
    }
}
