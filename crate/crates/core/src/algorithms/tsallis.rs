//! Tsallis-INF baseline for `d = 1`.
//!
//! The play distribution minimises `<x, L> - (4 / eta) * sum sqrt(x_i)` over
//! the simplex. Its solution is `x_i = 4 / (eta^2 (L_i - z)^2)` for the unique
//! `z < min L` with `sum x = 1`, which is found by Newton's method on `z`
//! with a bisection safeguard.

use rand::Rng;

use crate::combinatorial::{ActionFamily, OracleStats, SuperArm};

use super::{Feedback, Policy, PolicyDiagnostics, PolicyError, PolicyRng};

/// Required `|sum x - 1|` after solving.
pub const TSALLIS_TOLERANCE: f64 = 1e-10;
const NEWTON_ITERATIONS: usize = 50;
const BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TsallisSolution {
    pub x: Vec<f64>,
    /// Multiplier relative to `min L`.
    pub z: f64,
    pub residual: f64,
    pub newton_steps: usize,
    pub used_bisection: bool,
}

fn mass(shifted: &[f64], eta: f64, z: f64, x: &mut [f64]) -> (f64, f64) {
    let e2 = eta * eta;
    let (mut sum, mut slope) = (0.0, 0.0);
    for (xi, &l) in x.iter_mut().zip(shifted) {
        let gap = l - z;
        let v = 4.0 / (e2 * gap * gap);
        *xi = v;
        sum += v;
        slope += 2.0 * v / gap;
    }
    (sum - 1.0, slope)
}

/// Solves for the play distribution given loss estimates `losses` and
/// learning rate `eta`. `warm` is a starting multiplier relative to
/// `min losses`.
pub fn solve_tsallis(losses: &[f64], eta: f64, warm: Option<f64>) -> TsallisSolution {
    let k = losses.len();
    let floor = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = losses.iter().map(|l| l - floor).collect();
    let mut x = vec![0.0; k];
    // Every x_i <= 1/K at the lower end and the minimal arm alone has
    // mass 1 at the upper end.
    let (mut lo, mut hi) = (-2.0 * (k as f64).sqrt() / eta, -2.0 / eta);
    let mut z = warm.filter(|w| *w >= lo && *w <= hi).unwrap_or(hi);
    let mut residual;
    let mut steps = 0;
    loop {
        let (f, slope) = mass(&shifted, eta, z, &mut x);
        residual = f.abs();
        if residual < TSALLIS_TOLERANCE || steps == NEWTON_ITERATIONS {
            break;
        }
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        steps += 1;
        let next = z - f / slope;
        z = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    let mut used_bisection = false;
    if residual >= TSALLIS_TOLERANCE {
        used_bisection = true;
        for _ in 0..BISECTION_ITERATIONS {
            z = 0.5 * (lo + hi);
            let (f, _) = mass(&shifted, eta, z, &mut x);
            residual = f.abs();
            if residual < TSALLIS_TOLERANCE {
                break;
            }
            if f > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
        }
    }
    TsallisSolution {
        x,
        z,
        residual,
        newton_steps: steps,
        used_bisection,
    }
}

pub struct TsallisInf {
    eta_scale: f64,
    losses: Vec<f64>,
    x: Vec<f64>,
    mass: f64,
    z: Option<f64>,
    t: u64,
    max_residual: f64,
    last: usize,
}

impl TsallisInf {
    pub fn new(family: &ActionFamily, eta_scale: f64) -> Result<Self, PolicyError> {
        match family {
            ActionFamily::MSet { arms, size: 1 } if *arms >= 1 => {}
            _ => {
                return Err(PolicyError::Config(
                    "Tsallis-INF needs single-arm actions".into(),
                ))
            }
        }
        if !(eta_scale.is_finite() && eta_scale > 0.0) {
            return Err(PolicyError::Config(format!(
                "eta scale must be positive, got {eta_scale}"
            )));
        }
        let mut policy = Self {
            eta_scale,
            losses: vec![0.0; family.arms()],
            x: Vec::new(),
            mass: 0.0,
            z: None,
            t: 1,
            max_residual: 0.0,
            last: 0,
        };
        policy.refresh();
        Ok(policy)
    }

    fn eta(&self) -> f64 {
        self.eta_scale / (self.t as f64).sqrt()
    }

    /// Solves for the distribution of round `self.t`.
    fn refresh(&mut self) {
        let sol = solve_tsallis(&self.losses, self.eta(), self.z);
        self.max_residual = self.max_residual.max(sol.residual);
        self.mass = sol.x.iter().sum();
        self.z = Some(sol.z);
        self.x = sol.x;
    }

    /// Distribution of the next round.
    pub fn distribution(&self) -> &[f64] {
        &self.x
    }

    pub fn loss_estimates(&self) -> &[f64] {
        &self.losses
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }
}

impl Policy for TsallisInf {
    fn name(&self) -> &'static str {
        "tsallis"
    }

    fn select(&mut self, _t: u64, rng: &mut PolicyRng) -> Result<SuperArm, PolicyError> {
        let mut u = rng.gen::<f64>() * self.mass;
        let mut arm = self.x.len() - 1;
        for (i, &p) in self.x.iter().enumerate() {
            if u < p {
                arm = i;
                break;
            }
            u -= p;
        }
        self.last = arm;
        Ok(SuperArm::single(arm))
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        let arm = self.last;
        let r = feedback
            .reward_of(arm)
            .ok_or_else(|| PolicyError::Invariant(format!("no feedback for arm {arm}")))?;
        self.losses[arm] += (1.0 - r) / self.x[arm];
        self.t += 1;
        self.refresh();
        Ok(())
    }

    fn probability_of(&self, target: &SuperArm) -> Option<f64> {
        match target.members() {
            [i] if *i < self.x.len() => Some(self.x[*i]),
            _ => Some(0.0),
        }
    }

    fn action_distribution(&self) -> Option<Vec<(SuperArm, f64)>> {
        Some(
            self.x
                .iter()
                .enumerate()
                .map(|(i, &p)| (SuperArm::single(i), p))
                .collect(),
        )
    }

    fn oracle_stats(&self) -> OracleStats {
        OracleStats::default()
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics {
            max_simplex_residual: Some(self.max_residual),
            ..PolicyDiagnostics::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_losses_give_uniform_play() {
        let sol = solve_tsallis(&[0.0; 5], 1.0, None);
        for x in sol.x {
            approx::assert_relative_eq!(x, 0.2, epsilon = 1e-10);
        }
    }

    #[test]
    fn huge_loss_gap_concentrates_mass() {
        let sol = solve_tsallis(&[0.0, 1e6], 1.0, None);
        assert!(sol.x[0] > 0.99);
        assert!(sol.residual < TSALLIS_TOLERANCE);
    }

    #[test]
    fn newton_agrees_with_scalar_bisection() {
        // 4 / z^2 + 4 / (1 - z)^2 = 1 with z < 0.
        let f = |z: f64| 4.0 / (z * z) + 4.0 / ((1.0 - z) * (1.0 - z)) - 1.0;
        let (mut lo, mut hi) = (-100.0, -1e-3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z = 0.5 * (lo + hi);
        let expected = [4.0 / (z * z), 4.0 / ((1.0 - z) * (1.0 - z))];
        let sol = solve_tsallis(&[0.0, 1.0], 1.0, None);
        for (a, b) in sol.x.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn warm_start_outside_the_bracket_is_ignored() {
        let cold = solve_tsallis(&[0.0, 3.0, 7.0], 0.5, None);
        let warm = solve_tsallis(&[0.0, 3.0, 7.0], 0.5, Some(1e9));
        for (a, b) in cold.x.iter().zip(&warm.x) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_combinatorial_families() {
        assert!(TsallisInf::new(&ActionFamily::m_set(5, 2), 1.0).is_err());
    }
}
