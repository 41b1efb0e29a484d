use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A feasible subset of base arms played together in one round.
///
/// Members are kept sorted ascending and free of duplicates, so the derived
/// `Ord` is the lexicographic order on member lists used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperArm {
    members: SmallVec<[usize; 4]>,
}

impl SuperArm {
    pub fn new<I: IntoIterator<Item = usize>>(arms: I) -> Self {
        let mut members: SmallVec<[usize; 4]> = arms.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn single(arm: usize) -> Self {
        let mut members = SmallVec::new();
        members.push(arm);
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.members.binary_search(&arm).is_ok()
    }

    /// Correctly rounded sum of `weights` over the members.
    ///
    /// Every weight comparison in the crate goes through this function, so two
    /// sets whose exact sums are equal compare equal bit-for-bit whatever the
    /// member order.
    #[inline]
    pub fn weight(&self, weights: &[f64]) -> f64 {
        match self.members.as_slice() {
            [] => 0.0,
            [a] => weights[*a],
            [a, b] => weights[*a] + weights[*b],
            members => exact_sum(members.iter().map(|&i| weights[i])),
        }
    }
}

/// Correctly rounded floating-point sum (Shewchuk's partials, with the
/// half-even fix-up of the last bit).
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: SmallVec<[f64; 8]> = SmallVec::new();
    for mut x in values {
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

impl fmt::Display for SuperArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, arm) in self.members.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{arm}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for SuperArm {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter)
    }
}
