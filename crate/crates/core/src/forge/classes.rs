use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CheckedWindow, ForgeError};
use crate::arith::{sieve_primes, PrimeTable};
use crate::partition::Partition;

/// The prime size classes `P_1, …, P_M` of a window.
///
/// `P_1 … P_{M−1}` are listed in full. `P_M` is only needed inside the
/// window, so its list holds the window primes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeClassSet {
    /// Class scale: memberships use `log p / log x` with this `x`.
    pub x: u64,
    pub window: (u64, u64),
    pub exponents: Vec<(f64, f64)>,
    /// Inclusive prime bounds per class.
    pub bounds: Vec<(u64, u64)>,
    pub classes: Vec<Vec<u64>>,
}

impl PrimeClassSet {
    /// 1-based class of `p`, if any.
    pub fn class_of(&self, p: u64) -> Option<u32> {
        self.bounds
            .iter()
            .position(|&(lo, hi)| lo <= p && p <= hi)
            .map(|i| i as u32 + 1)
    }

    pub fn class(&self, i: u32) -> &[u64] {
        &self.classes[i as usize - 1]
    }

    /// Primes of class `i` in `[a, b]`.
    fn class_between(&self, i: u32, a: u64, b: u64) -> &[u64] {
        let c = self.class(i);
        let s = c.partition_point(|&p| p < a);
        let e = c.partition_point(|&p| p <= b);
        &c[s..e.max(s)]
    }
}

/// Integer bounds of `{p : log p / log x ∈ [a, b]}`.
fn exponent_bounds(x: u64, a: f64, b: f64) -> (u64, u64) {
    let lx = (x as f64).ln();
    let mut lo = (a * lx).exp().ceil() as u64;
    while lo > 2 && ((lo - 1) as f64).ln() >= a * lx {
        lo -= 1;
    }
    while (lo as f64).ln() < a * lx {
        lo += 1;
    }
    let mut hi = (b * lx).exp().floor() as u64;
    while ((hi + 1) as f64).ln() <= b * lx {
        hi += 1;
    }
    while hi > 0 && (hi as f64).ln() > b * lx {
        hi -= 1;
    }
    (lo.max(2), hi)
}

/// Inclusive integer bounds of each class `P_i`, `i = 1..=M`.
pub fn class_bounds(cw: &CheckedWindow) -> Vec<(u64, u64)> {
    cw.class_exponents
        .iter()
        .map(|&(a, b)| exponent_bounds(cw.cfg.x, a, b))
        .collect()
}

/// Largest prime needed for the classes `P_1 … P_{M−1}`.
pub fn small_class_bound(cw: &CheckedWindow) -> u64 {
    let m = cw.cfg.m as usize;
    let (a, b) = cw.class_exponents[m - 2];
    exponent_bounds(cw.cfg.x, a, b).1
}

/// Sieves the two prime tables the classes need: `[2, small_class_bound]`
/// and the window `(lo, hi]`.
pub fn sieve_class_tables(cw: &CheckedWindow, lo: u64, hi: u64) -> Result<(PrimeTable, PrimeTable), ForgeError> {
    let small = sieve_primes(2, small_class_bound(cw).max(2))?;
    let window = sieve_primes(lo + 1, hi)?;
    Ok((small, window))
}

/// Builds the classes for the sub-window `(lo, hi]` of the configured
/// window. `small` must cover the classes below `M` and `window` must cover
/// `(lo, hi]`.
pub fn build_prime_classes(
    cw: &CheckedWindow,
    lo: u64,
    hi: u64,
    small: &PrimeTable,
    window: &PrimeTable,
) -> Result<PrimeClassSet, ForgeError> {
    let x = cw.cfg.x;
    let m = cw.cfg.m as usize;
    let bounds = class_bounds(cw);
    for w in bounds.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(ForgeError::Invariant(format!("classes overlap: {:?} and {:?}", w[0], w[1])));
        }
    }
    let mut classes = Vec::with_capacity(m);
    for &(a, b) in &bounds[..m - 1] {
        if !(small.range_lo <= a && small.range_hi >= b) {
            return Err(ForgeError::Coverage {
                needed: (a, b),
                covered: (small.range_lo, small.range_hi),
            });
        }
        classes.push(small.slice_closed(a, b).to_vec());
    }
    if !(window.range_lo <= lo + 1 && window.range_hi >= hi) {
        return Err(ForgeError::Coverage {
            needed: (lo + 1, hi),
            covered: (window.range_lo, window.range_hi),
        });
    }
    let (a, b) = bounds[m - 1];
    classes.push(window.slice_closed((lo + 1).max(a), hi.min(b)).to_vec());
    Ok(PrimeClassSet {
        x,
        window: (lo, hi),
        exponents: cw.class_exponents.clone(),
        bounds,
        classes,
    })
}

/// A member of `C_α`: `n` with its prime factors sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub n: u64,
    pub factors: Vec<u64>,
}

/// All `n = p_1⋯p_r` in the window with `p_i ∈ P_{α_i}`, sorted by `n`.
pub fn enumerate_class(alpha: &Partition, classes: &PrimeClassSet) -> Vec<ClassEntry> {
    let (lo, hi) = classes.window;
    let parts = alpha.parts();
    if parts.is_empty() {
        return Vec::new();
    }
    let first = classes.class(parts[0]);
    let mut out: Vec<ClassEntry> = first
        .par_iter()
        .flat_map_iter(|&p| {
            let mut acc = Vec::new();
            let mut stack = vec![p];
            extend(parts, classes, lo, hi, p, &mut stack, &mut acc);
            acc
        })
        .collect();
    out.sort_unstable_by_key(|e| e.n);
    out.dedup_by_key(|e| e.n);
    out
}

fn extend(
    parts: &[u32],
    classes: &PrimeClassSet,
    lo: u64,
    hi: u64,
    prod: u64,
    stack: &mut Vec<u64>,
    out: &mut Vec<ClassEntry>,
) {
    let j = stack.len();
    if j == parts.len() {
        if prod > lo && prod <= hi {
            let mut factors = stack.clone();
            factors.sort_unstable();
            out.push(ClassEntry { n: prod, factors });
        }
        return;
    }
    // equal parts draw from one class; keep those primes non-decreasing
    let floor = if parts[j] == parts[j - 1] { stack[j - 1] } else { 0 };
    let rest = &parts[j + 1..];
    // smallest possible product of the factors after this one
    let tail_min: u64 = rest
        .iter()
        .map(|&i| classes.class(i).first().copied().unwrap_or(u64::MAX))
        .try_fold(1u64, |a, b| a.checked_mul(b))
        .unwrap_or(u64::MAX);
    if rest.is_empty() {
        // last factor: range lookup
        let a = (lo / prod + 1).max(floor);
        let b = hi / prod;
        if a > b {
            return;
        }
        for &p in classes.class_between(parts[j], a, b) {
            stack.push(p);
            extend(parts, classes, lo, hi, prod * p, stack, out);
            stack.pop();
        }
        return;
    }
    for &p in classes.class(parts[j]) {
        if p < floor {
            continue;
        }
        let Some(next) = prod.checked_mul(p) else { break };
        if next.saturating_mul(tail_min) > hi {
            break;
        }
        stack.push(p);
        extend(parts, classes, lo, hi, next, stack, out);
        stack.pop();
    }
}
