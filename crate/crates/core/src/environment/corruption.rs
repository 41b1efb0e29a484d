use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EnvError, ProblemInstance};

/// Sum of the `d` largest absolute entries of `c`.
pub fn ld_norm(c: &[f64], d: usize) -> f64 {
    let mut top: Vec<f64> = Vec::with_capacity(d + 1);
    for &x in c {
        let a = x.abs();
        if top.len() < d {
            top.push(a);
        } else if d > 0 && a > top[d - 1] {
            top[d - 1] = a;
        } else {
            continue;
        }
        let mut j = top.len() - 1;
        while j > 0 && top[j] > top[j - 1] {
            top.swap(j, j - 1);
            j -= 1;
        }
    }
    top.iter().sum()
}

/// Budget accounting for the adversary, measured in the L-[d] norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionLedger {
    budget: f64,
    spent: f64,
    last_cost: f64,
    corrupted_rounds: u64,
    d: usize,
}

impl CorruptionLedger {
    /// An infinite budget is capped at `horizon * d`, the most any adversary
    /// with rewards in `[0, 1]` could ever spend.
    pub fn new(budget: f64, d: usize, horizon: u64) -> Result<Self, EnvError> {
        if budget.is_nan() || budget < 0.0 {
            return Err(EnvError::InvalidBudget(budget));
        }
        Ok(Self {
            budget: budget.min(horizon as f64 * d as f64),
            spent: 0.0,
            last_cost: 0.0,
            corrupted_rounds: 0,
            d,
        })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        (self.budget - self.spent).max(0.0)
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() <= 0.0
    }

    /// `C_t` of the most recent charged round.
    pub fn last_cost(&self) -> f64 {
        self.last_cost
    }

    pub fn corrupted_rounds(&self) -> u64 {
        self.corrupted_rounds
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Charges the modification `c` (scaled in place if it would overdraw)
    /// and returns the scale factor that was applied.
    pub fn charge(&mut self, c: &mut [f64]) -> f64 {
        let cost = ld_norm(c, self.d);
        if cost <= 0.0 {
            self.last_cost = 0.0;
            return 1.0;
        }
        let remaining = self.remaining();
        let scale = if cost > remaining { remaining / cost } else { 1.0 };
        if scale < 1.0 {
            for x in c.iter_mut() {
                *x *= scale;
            }
        }
        let charged = cost * scale;
        self.spent = (self.spent + charged).min(self.budget);
        if scale < 1.0 {
            self.spent = self.budget;
        }
        self.last_cost = charged;
        self.corrupted_rounds += 1;
        scale
    }
}

/// When the adversary spends its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    None,
    Begin,
    Suppress,
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::None => "none",
            Heuristic::Begin => "begin",
            Heuristic::Suppress => "suppress",
        })
    }
}

impl FromStr for Heuristic {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Heuristic::None),
            "begin" => Ok(Heuristic::Begin),
            "suppress" => Ok(Heuristic::Suppress),
            other => Err(EnvError::UnknownHeuristic(other.to_string())),
        }
    }
}

/// Returns whether BEGIN corrupts this round: from the first round until
/// the budget is gone.
pub fn begin_heuristic_schedule(ledger: &CorruptionLedger) -> bool {
    !ledger.is_exhausted()
}

/// Hysteresis switch of SUPPRESS: turn on above `p0`, off below `p0 / 3`.
pub fn suppress_heuristic_update(active: bool, p: f64, p0: f64) -> bool {
    if active {
        p >= p0 / 3.0
    } else {
        p > p0
    }
}

/// Rounds remembered by the empirical fallback estimate of `p`.
pub const SUPPRESS_WINDOW: usize = 100;

/// Swap adversary driven by one of the timing heuristics.
///
/// On a corrupted round every optimal arm's reward is replaced by a fresh
/// draw at the best suboptimal mean and every other arm's reward by a fresh
/// draw at the worst optimal mean.
#[derive(Debug, Clone)]
pub struct Adversary {
    heuristic: Heuristic,
    p0: f64,
    active: bool,
    window: VecDeque<bool>,
    window_hits: usize,
    is_optimal_arm: Vec<bool>,
    optimal_target: f64,
    suboptimal_target: f64,
    delta: Vec<f64>,
}

impl Adversary {
    pub fn new(
        heuristic: Heuristic,
        instance: &ProblemInstance,
        p0_override: Option<f64>,
    ) -> Result<Self, EnvError> {
        let p0 = match (heuristic, p0_override) {
            (_, Some(p)) if (0.0..=1.0).contains(&p) => p,
            (_, Some(p)) => return Err(EnvError::InvalidProbability(p)),
            (Heuristic::Suppress, None) => super::compute_p0(instance)?,
            _ => 1.0 / instance.family().feasible_count().max(1) as f64,
        };
        let k = instance.arms();
        let means = instance.means();
        let is_optimal_arm: Vec<bool> = (0..k).map(|i| instance.optimal().contains(i)).collect();
        let optimal_min = (0..k)
            .filter(|&i| is_optimal_arm[i])
            .map(|i| means[i])
            .fold(f64::INFINITY, f64::min);
        let suboptimal_max = (0..k)
            .filter(|&i| !is_optimal_arm[i])
            .map(|i| means[i])
            .fold(f64::NEG_INFINITY, f64::max);
        // Degenerate family where every arm is optimal: nothing to swap with.
        let (optimal_target, suboptimal_target) = if suboptimal_max.is_finite() {
            (suboptimal_max, optimal_min)
        } else {
            (optimal_min, optimal_min)
        };
        Ok(Self {
            heuristic,
            p0,
            active: false,
            window: VecDeque::with_capacity(SUPPRESS_WINDOW),
            window_hits: 0,
            is_optimal_arm,
            optimal_target,
            suboptimal_target,
            delta: vec![0.0; k],
        })
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Records whether the learner played `Z*`; feeds the windowed estimate
    /// of `p` used when the learner does not expose its distribution.
    pub fn record_choice(&mut self, played_optimal: bool) {
        if self.heuristic != Heuristic::Suppress {
            return;
        }
        if self.window.len() == SUPPRESS_WINDOW && self.window.pop_front() == Some(true) {
            self.window_hits -= 1;
        }
        self.window.push_back(played_optimal);
        if played_optimal {
            self.window_hits += 1;
        }
    }

    /// Empirical frequency of `Z*` over the recent window (0 when empty).
    pub fn window_estimate(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.window_hits as f64 / self.window.len() as f64
        }
    }

    /// Decides whether this round is corrupted. `p` is the learner's current
    /// probability of playing `Z*`, if it exposes one.
    pub fn decide(&mut self, ledger: &CorruptionLedger, p: Option<f64>) -> bool {
        match self.heuristic {
            Heuristic::None => false,
            Heuristic::Begin => begin_heuristic_schedule(ledger),
            Heuristic::Suppress => {
                let p = p.unwrap_or_else(|| self.window_estimate());
                self.active = suppress_heuristic_update(self.active, p, self.p0);
                self.active && !ledger.is_exhausted()
            }
        }
    }

    /// Writes the corrupted vector for `clean` into `out` and charges the
    /// ledger. Returns the realized `C_t`.
    pub fn apply_swap<R: Rng + ?Sized>(
        &mut self,
        ledger: &mut CorruptionLedger,
        clean: &[f64],
        out: &mut [f64],
        rng: &mut R,
    ) -> f64 {
        for (i, (&r, c)) in clean.iter().zip(self.delta.iter_mut()).enumerate() {
            let target = if self.is_optimal_arm[i] {
                self.optimal_target
            } else {
                self.suboptimal_target
            };
            let fresh = if rng.gen::<f64>() < target { 1.0 } else { 0.0 };
            *c = fresh - r;
        }
        ledger.charge(&mut self.delta);
        for ((o, &r), &c) in out.iter_mut().zip(clean).zip(&self.delta) {
            *o = r + c;
        }
        ledger.last_cost()
    }

    /// One full adversary step on `R_t`: decide, then corrupt or pass
    /// through.
    pub fn corrupt<R: Rng + ?Sized>(
        &mut self,
        ledger: &mut CorruptionLedger,
        clean: &[f64],
        policy_optimal_prob: Option<f64>,
        rng: &mut R,
    ) -> Vec<f64> {
        let mut out = clean.to_vec();
        if self.decide(ledger, policy_optimal_prob) {
            self.apply_swap(ledger, clean, &mut out, rng);
        }
        out
    }
}
