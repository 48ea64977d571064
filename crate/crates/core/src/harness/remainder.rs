use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, SlabContext};
use crate::forge::class_bounds;
use crate::numeric::NeumaierSum;
use crate::partition::Partition;

/// Largest `d_max` accepted by [`remainder_scan`].
pub const MAX_DIVISOR_SCAN: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub d: u64,
    /// `A_d = Σ_{d|n} a_n`.
    pub a_d: f64,
    /// `⌊hi/d⌋ − ⌊lo/d⌋`, the number of multiples of `d` in the window.
    pub multiples: u64,
    /// `A_d` minus the exact multiple count.
    pub r_d: f64,
    /// `A_d − y/d`.
    pub r_d_smooth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub lo: u64,
    pub hi: u64,
    pub d_max: u64,
    pub rows: Vec<RemainderRow>,
    pub abs_r_sum: f64,
    /// `max_d d·|r_d|/y` and where it is attained.
    pub max_normalized: f64,
    pub argmax_d: u64,
    /// The entry-wise accumulation matched the sweep over multiples.
    pub two_way_agree: bool,
}

impl RemainderReport {
    pub fn normalized(&self, d: u64) -> Option<f64> {
        let row = self.rows.get(d.checked_sub(1)? as usize)?;
        Some(d as f64 * row.r_d.abs() / (self.hi - self.lo) as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,a_d,multiples,r_d,r_d_smooth\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:e},{:e}\n", r.d, r.a_d, r.multiples, r.r_d, r.r_d_smooth));
        }
        s
    }
}

fn multiples_sum(ctx: &SlabContext, d: u64, values: &[f64]) -> f64 {
    let lo = ctx.lo();
    let mut acc = NeumaierSum::new();
    let mut n = (lo / d + 1) * d;
    while n <= ctx.hi() {
        acc.add(values[(n - lo - 1) as usize]);
        n += d;
    }
    acc.value()
}

fn divisors_up_to(factors: &[u64], bound: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    let mut i = 0;
    while i < factors.len() {
        let p = factors[i];
        let e = factors[i..].iter().take_while(|&&q| q == p).count();
        let base = divs.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk = pk.saturating_mul(p);
            divs.extend(base.iter().map(|d| d.saturating_mul(pk)).filter(|&d| d <= bound));
        }
        i += e;
    }
    divs
}

/// `A_d` and `r_d` for every `d ≤ d_max`.
///
/// `A_d` is accumulated twice, by sweeping the multiples of `d` and by
/// visiting the divisors of each weighted entry; the two must agree exactly.
pub fn remainder_scan(ctx: &SlabContext, d_max: u64) -> Result<RemainderReport, HarnessError> {
    if d_max == 0 {
        return Err(HarnessError::BadParameter("d_max must be positive".into()));
    }
    if d_max > MAX_DIVISOR_SCAN {
        return Err(HarnessError::TooLarge {
            what: "divisor scan".into(),
            needed: d_max,
            budget: MAX_DIVISOR_SCAN,
        });
    }
    let (lo, hi) = (ctx.lo(), ctx.hi());
    let y = ctx.y();
    let bias: Vec<f64> = (1..=d_max)
        .into_par_iter()
        .map(|d| multiples_sum(ctx, d, &ctx.b))
        .collect();

    let mut by_entry = vec![NeumaierSum::new(); d_max as usize];
    for e in &ctx.slab.entries {
        let factors = if e.factors.is_empty() && e.n > 1 {
            ctx.factors
                .get(e.n)
                .iter()
                .flat_map(|&(p, k)| std::iter::repeat_n(p, k as usize))
                .collect()
        } else {
            e.factors.clone()
        };
        for d in divisors_up_to(&factors, d_max) {
            by_entry[d as usize - 1].add(e.b);
        }
    }
    let two_way_agree = by_entry.iter().zip(&bias).all(|(a, &b)| a.value() == b);

    let mut rows = Vec::with_capacity(d_max as usize);
    let mut abs = NeumaierSum::new();
    let (mut max_normalized, mut argmax_d) = (0.0, 1);
    for (i, &r) in bias.iter().enumerate() {
        let d = i as u64 + 1;
        let multiples = hi / d - lo / d;
        let a_d = multiples as f64 + r;
        abs.add(r.abs());
        let norm = d as f64 * r.abs() / y;
        if norm > max_normalized {
            max_normalized = norm;
            argmax_d = d;
        }
        rows.push(RemainderRow {
            d,
            a_d,
            multiples,
            r_d: r,
            r_d_smooth: a_d - y / d as f64,
        });
    }
    Ok(RemainderReport {
        lo,
        hi,
        d_max,
        rows,
        abs_r_sum: abs.value(),
        max_normalized,
        argmax_d,
        two_way_agree,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationRow {
    pub d: u64,
    /// `Σ_{α ⊇ β} Σ_{n ∈ C_α, d | n} b_n`.
    pub sum: f64,
    /// `sum · d / y`.
    pub normalized: f64,
}

/// Class-restricted bias sums for `d ∈ D_β`.
pub fn class_cancellation(
    ctx: &SlabContext,
    beta: &Partition,
    sample_d: &[u64],
) -> Result<Vec<CancellationRow>, HarnessError> {
    let cfg = ctx
        .slab
        .header
        .window
        .as_ref()
        .ok_or_else(|| HarnessError::BadParameter("slab has no class structure".into()))?;
    let cw = cfg.validate()?;
    if beta.sum() + 2 > cfg.m {
        return Err(HarnessError::NotInQ {
            beta: beta.to_string(),
            limit: cfg.m - 2,
        });
    }
    let bounds = class_bounds(&cw);
    let mut rows = Vec::with_capacity(sample_d.len());
    for &d in sample_d {
        let f = crate::arith::factorize_trial(d)?;
        let mut cls = Vec::new();
        for &(p, e) in &f.prime_powers {
            let c = bounds.iter().position(|&(a, b)| a <= p && p <= b);
            match c {
                Some(c) => cls.extend(std::iter::repeat_n(c as u32 + 1, e as usize)),
                None => {
                    return Err(HarnessError::NotInDBeta {
                        d,
                        beta: beta.to_string(),
                    })
                }
            }
        }
        cls.sort_unstable();
        if cls != beta.parts() {
            return Err(HarnessError::NotInDBeta {
                d,
                beta: beta.to_string(),
            });
        }
        let mut acc = NeumaierSum::new();
        for e in &ctx.slab.entries {
            if e.n % d == 0 && ctx.slab.alpha_of(e).is_some_and(|a| a.contains(beta)) {
                acc.add(e.b);
            }
        }
        let sum = acc.value();
        rows.push(CancellationRow {
            d,
            sum,
            normalized: sum * d as f64 / ctx.y(),
        });
    }
    Ok(rows)
}

/// `Σ_{d ≤ x^α} |Σ_{d|n} μ(n) a_n| / y`.
pub fn hooley_progression_bias(ctx: &SlabContext, alpha_exp: f64) -> Result<f64, HarnessError> {
    let limit = match &ctx.slab.header.window {
        Some(cfg) => 1.0 - cfg.varpi,
        None => 1.0,
    };
    if !(alpha_exp < limit) {
        return Err(HarnessError::BadParameter(format!(
            "alpha = {alpha_exp} must be below {limit}"
        )));
    }
    if alpha_exp <= 0.0 {
        return Ok(0.0);
    }
    let d_max = (ctx.x_ref() as f64).powf(alpha_exp).floor() as u64;
    if d_max > MAX_DIVISOR_SCAN {
        return Err(HarnessError::TooLarge {
            what: "progression scan".into(),
            needed: d_max,
            budget: MAX_DIVISOR_SCAN,
        });
    }
    let lo = ctx.lo();
    let mu_a: Vec<f64> = (0..ctx.b.len())
        .map(|i| {
            let mu = crate::arith::mobius_of(ctx.factors.get(lo + 1 + i as u64));
            mu as f64 * (1.0 + ctx.b[i])
        })
        .collect();
    let terms: Vec<f64> = (1..=d_max)
        .into_par_iter()
        .map(|d| multiples_sum(ctx, d, &mu_a).abs())
        .collect();
    Ok(terms.iter().copied().collect::<NeumaierSum>().value() / ctx.y())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::WeightedSlab;

    #[test]
    fn unbiased_remainders_are_rounding() {
        let slab = WeightedSlab::unbiased(1_000_000, 1_010_000);
        let ctx = SlabContext::new(&slab).unwrap();
        let rep = remainder_scan(&ctx, 1000).unwrap();
        assert!(rep.two_way_agree);
        assert!(rep.rows.iter().all(|r| r.r_d == 0.0 && r.r_d_smooth.abs() <= 1.0));
        assert_eq!(rep.rows[0].a_d, 10_000.0);
    }

    #[test]
    fn selberg_remainders_two_ways() {
        let slab = crate::forge::selberg_sequence(100_000, 120_000).unwrap();
        let ctx = SlabContext::new(&slab).unwrap();
        let rep = remainder_scan(&ctx, 500).unwrap();
        assert!(rep.two_way_agree);
        // brute force A_6
        let a6: f64 = slab.entries.iter().filter(|e| e.n % 6 == 0).map(|e| 1.0 + e.b).sum();
        assert_eq!(rep.rows[5].a_d, a6);
    }

    #[test]
    fn hooley_edge_cases() {
        let slab = WeightedSlab::unbiased(1_000_000, 1_010_000);
        let ctx = SlabContext::new(&slab).unwrap();
        assert_eq!(hooley_progression_bias(&ctx, 0.0).unwrap(), 0.0);
        assert!(hooley_progression_bias(&ctx, 1.5).is_err());
        let v = hooley_progression_bias(&ctx, 0.3).unwrap();
        assert!(v.is_finite() && v >= 0.0);
    }
}
