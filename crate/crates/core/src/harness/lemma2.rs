use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::arith::sieve_primes;
use crate::numeric::NeumaierSum;
use crate::quadrature::{simplex_integral, BumpMixture, QuadratureConfig};

/// Tuples visited before [`lemma2_check`] gives up.
const TUPLE_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Check {
    pub r: usize,
    pub x: u64,
    pub y: u64,
    /// `Σ f(log p_1/log n, …, log p_r/log n)` over ordered prime tuples
    /// with `n = p_1⋯p_r ∈ (x, x+y]`.
    pub enumerated: f64,
    /// `(y / log x) ∫_{U_r} f/(u_1⋯u_r)`.
    pub predicted: f64,
    pub relative_error: f64,
    pub tuples: u64,
}

/// Compares a prime-tuple sum with its integral prediction.
pub fn lemma2_check(
    f: &BumpMixture,
    x: u64,
    y: u64,
    quad: &QuadratureConfig,
) -> Result<Lemma2Check, HarnessError> {
    let r = f.m;
    if r == 0 || y == 0 || x < 2 {
        return Err(HarnessError::BadParameter(format!("need r, y >= 1 and x >= 2, got {r}, {y}, {x}")));
    }
    let min_coord = f.support_min_coordinate();
    if r > 1 && min_coord <= 0.0 {
        return Err(HarnessError::BadParameter(format!(
            "support reaches coordinate {min_coord}, must stay positive"
        )));
    }
    let integral = simplex_integral(f, quad)?;
    let predicted = y as f64 / (x as f64).ln() * integral;
    let hi = x + y;

    let (enumerated, tuples) = if r == 1 {
        let primes = sieve_primes(x + 1, hi)?;
        let v = f.eval(&[1.0]);
        let s: NeumaierSum = primes.primes.iter().map(|_| v).collect();
        (s.value(), primes.len() as u64)
    } else {
        // every factor lies in [x^{min_coord}, (x+y)^{max_coord}]
        let max_coord = f
            .centers
            .iter()
            .flat_map(|c| c.iter())
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            + f.xi;
        let p_lo = (x as f64).powf(min_coord).floor().max(2.0) as u64;
        let p_hi = (hi as f64).powf(max_coord.min(1.0)).ceil() as u64;
        let table = sieve_primes(2, p_hi)?;
        let primes = table.slice_closed(p_lo, p_hi);
        let est = (primes.len() as u64).saturating_pow((r - 1) as u32);
        if est > TUPLE_BUDGET {
            return Err(HarnessError::TooLarge {
                what: "prime tuple enumeration".into(),
                needed: est,
                budget: TUPLE_BUDGET,
            });
        }
        let mut acc = NeumaierSum::new();
        let mut count = 0;
        let mut stack = Vec::with_capacity(r);
        walk(f, primes, x, hi, 1, &mut stack, &mut acc, &mut count);
        (acc.value(), count)
    };
    let relative_error = if predicted == 0.0 {
        if enumerated == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (enumerated - predicted) / predicted
    };
    Ok(Lemma2Check {
        r,
        x,
        y,
        enumerated,
        predicted,
        relative_error,
        tuples,
    })
}


#[allow(clippy::too_many_arguments)]
fn walk(
    f: &BumpMixture,
    primes: &[u64],
    lo: u64,
    hi: u64,
    prod: u64,
    stack: &mut Vec<u64>,
    acc: &mut NeumaierSum,
    count: &mut u64,
) {
    let left = f.m - stack.len();
    if left == 1 {
        let a = lo / prod + 1;
        let b = hi / prod;
        let s = primes.partition_point(|&p| p < a);
        let e = primes.partition_point(|&p| p <= b);
        for &p in &primes[s..e.max(s)] {
            stack.push(p);
            let logs: Vec<f64> = stack.iter().map(|&q| (q as f64).ln()).collect();
            let total: f64 = logs.iter().sum();
            let u: Vec<f64> = logs.iter().map(|l| l / total).collect();
            acc.add(f.eval(&u));
            *count += 1;
            stack.pop();
        }
        return;
    }
    let smallest = primes.first().copied().unwrap_or(u64::MAX);
    for &p in primes {
        let next = prod.saturating_mul(p);
        if next.saturating_mul(smallest.saturating_pow(left as u32 - 1)) > hi {
            break;
        }
        stack.push(p);
        walk(f, primes, lo, hi, next, stack, acc, count);
        stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(r: usize, xi: f64, weight: f64) -> BumpMixture {
        BumpMixture {
            m: r,
            xi,
            product_prefactor: false,
            centers: vec![vec![1.0 / r as f64; r]],
            weights: vec![weight],
        }
    }

    #[test]
    fn single_prime_counts_primes() {
        let c = lemma2_check(&central(1, 0.5, 1.0), 1_000_000, 10_000, &QuadratureConfig::default()).unwrap();
        assert_eq!(c.enumerated, 753.0);
        assert!((c.predicted - 10_000.0 / 1e6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_function_gives_zero() {
        let c = lemma2_check(&central(2, 0.2, 0.0), 1_000_000, 10_000, &QuadratureConfig::default()).unwrap();
        assert_eq!((c.enumerated, c.predicted, c.relative_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_primes_near_prediction() {
        let c = lemma2_check(&central(2, 0.2, 1.0), 10_000_000, 100_000, &QuadratureConfig::default()).unwrap();
        assert!(c.relative_error.abs() < 0.15, "{c:?}");
    }
}
