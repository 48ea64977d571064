use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ArithError;

/// Knobs for the segmented sieve. Output never depends on `segment_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub segment_len: usize,
    /// Largest admissible `hi - lo + 1`.
    pub max_range: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: 1 << 20,
            max_range: 1 << 34,
        }
    }
}

/// The primes of `[range_lo, range_hi]`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTable {
    pub range_lo: u64,
    pub range_hi: u64,
    pub primes: Vec<u64>,
}

impl PrimeTable {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// True when every prime up to `bound` is listed.
    pub fn covers_up_to(&self, bound: u64) -> bool {
        self.range_lo <= 2 && self.range_hi >= bound
    }

    /// Primes in the closed interval `[a, b]`.
    pub fn slice_closed(&self, a: u64, b: u64) -> &[u64] {
        if a > b {
            return &[];
        }
        let i = self.primes.partition_point(|&p| p < a);
        let j = self.primes.partition_point(|&p| p <= b);
        &self.primes[i..j]
    }

    /// Number of primes `<= t` in the table.
    pub fn count_le(&self, t: u64) -> usize {
        self.primes.partition_point(|&p| p <= t)
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// Sieve of Eratosthenes on `[0, n]`, used for base primes.
pub(crate) fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn sieve_primes(lo: u64, hi: u64) -> Result<PrimeTable, ArithError> {
    sieve_primes_with(lo, hi, &SieveConfig::default())
}

/// Segmented sieve over `[lo, hi]`. Segments are sieved in parallel and
/// concatenated in order.
pub fn sieve_primes_with(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<PrimeTable, ArithError> {
    if lo < 2 || lo > hi {
        return Err(ArithError::InvertedRange { lo, hi });
    }
    let len = hi - lo + 1;
    if len > cfg.max_range {
        return Err(ArithError::RangeTooLarge {
            len,
            budget: cfg.max_range,
        });
    }
    let base = small_primes(hi.isqrt());
    let seg = cfg.segment_len.max(1) as u64;
    let nseg = len.div_ceil(seg);
    let chunks: Vec<Vec<u64>> = (0..nseg)
        .into_par_iter()
        .map(|s| {
            let a = lo + s * seg;
            let b = (a + seg - 1).min(hi);
            sieve_segment(a, b, &base)
        })
        .collect();
    let primes = chunks.concat();
    Ok(PrimeTable {
        range_lo: lo,
        range_hi: hi,
        primes,
    })
}

fn sieve_segment(a: u64, b: u64, base: &[u64]) -> Vec<u64> {
    let width = (b - a + 1) as usize;
    let mut composite = vec![false; width];
    for &p in base {
        if p * p > b {
            break;
        }
        let first = (p * p).max(a.div_ceil(p) * p);
        let mut m = first;
        while m <= b {
            composite[(m - a) as usize] = true;
            m += p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|&(_, &c)| !c)
        .map(|(i, _)| a + i as u64)
        .filter(|&n| n >= 2)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn tiny_range() {
        assert_eq!(sieve_primes(2, 10).unwrap().primes, vec![2, 3, 5, 7]);
    }

    #[test]
    fn range_around_one_hundred() {
        assert_eq!(
            sieve_primes(90, 110).unwrap().primes,
            vec![97, 101, 103, 107, 109]
        );
    }

    #[test]
    fn range_near_one_million_matches_trial_division() {
        let lo = 1_000_000;
        let hi = lo + 100;
        let expected: Vec<u64> = (lo..=hi).filter(|&n| trial_prime(n)).collect();
        assert_eq!(sieve_primes(lo, hi).unwrap().primes, expected);
    }

    #[test]
    fn segment_length_does_not_change_output() {
        let reference = sieve_primes(2, 200_000).unwrap();
        for seg in [1, 7, 1000, 65_536] {
            let cfg = SieveConfig {
                segment_len: seg,
                ..SieveConfig::default()
            };
            assert_eq!(sieve_primes_with(2, 200_000, &cfg).unwrap(), reference);
        }
    }

    #[test]
    fn inverted_and_oversized_ranges_are_rejected() {
        assert!(matches!(
            sieve_primes(10, 5),
            Err(ArithError::InvertedRange { .. })
        ));
        assert!(matches!(
            sieve_primes(1, 5),
            Err(ArithError::InvertedRange { .. })
        ));
        let cfg = SieveConfig {
            max_range: 100,
            ..SieveConfig::default()
        };
        assert!(matches!(
            sieve_primes_with(2, 1000, &cfg),
            Err(ArithError::RangeTooLarge { .. })
        ));
    }

    #[test]
    fn table_queries() {
        let t = sieve_primes(2, 100).unwrap();
        assert_eq!(t.slice_closed(10, 20), &[11, 13, 17, 19]);
        assert_eq!(t.count_le(100), 25);
        assert!(t.contains(97) && !t.contains(91));
        assert!(t.covers_up_to(100) && !t.covers_up_to(101));
    }
}
