use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ArithError, PrimeTable};

/// `n` as a product of prime powers, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Self {
            n: 1,
            prime_powers: Vec::new(),
        }
    }

    /// Number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.prime_powers.iter().map(|&(_, e)| e).sum()
    }

    pub fn omega(&self) -> usize {
        self.prime_powers.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.prime_powers.iter().all(|&(_, e)| e == 1)
    }

    /// Recomputes the product; `None` on overflow.
    pub fn product(&self) -> Option<u64> {
        self.prime_powers
            .iter()
            .try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }
}

/// Trial division by the primes of `aux`, which must list every prime up to
/// `sqrt(n)`.
pub fn factorize(n: u64, aux: &PrimeTable) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::NonPositive);
    }
    let root = n.isqrt();
    if !aux.covers_up_to(root) {
        return Err(ArithError::InsufficientTable {
            needed: root,
            covered: if aux.range_lo <= 2 { aux.range_hi } else { 0 },
        });
    }
    let mut rest = n;
    let mut prime_powers = Vec::new();
    for &p in &aux.primes {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            prime_powers.push((p, e));
        }
    }
    if rest > 1 {
        prime_powers.push((rest, 1));
    }
    Ok(Factorization { n, prime_powers })
}

/// Factorizations of every integer in `[lo, hi]`, stored contiguously.
#[derive(Debug, Clone)]
pub struct RangeFactorization {
    lo: u64,
    offsets: Vec<u32>,
    pairs: Vec<(u64, u32)>,
}

impl RangeFactorization {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Prime powers of `n`; panics when `n` is outside the range.
    pub fn get(&self, n: u64) -> &[(u64, u32)] {
        let i = (n - self.lo) as usize;
        &self.pairs[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn factorization(&self, n: u64) -> Factorization {
        Factorization {
            n,
            prime_powers: self.get(n).to_vec(),
        }
    }
}

const FACTOR_BLOCK: u64 = 1 << 16;

/// Factors every integer of `[lo, hi]` by dividing out each prime of `aux`
/// at its multiples; the cofactor left over is prime.
pub fn factor_range(lo: u64, hi: u64, aux: &PrimeTable) -> Result<RangeFactorization, ArithError> {
    if lo == 0 {
        return Err(ArithError::NonPositive);
    }
    if lo > hi {
        return Err(ArithError::InvertedRange { lo, hi });
    }
    let root = hi.isqrt();
    if !aux.covers_up_to(root) {
        return Err(ArithError::InsufficientTable {
            needed: root,
            covered: if aux.range_lo <= 2 { aux.range_hi } else { 0 },
        });
    }
    let base = aux.slice_closed(2, root);
    let nblocks = (hi - lo + 1).div_ceil(FACTOR_BLOCK);
    let blocks: Vec<Vec<Vec<(u64, u32)>>> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let a = lo + b * FACTOR_BLOCK;
            let z = (a + FACTOR_BLOCK - 1).min(hi);
            factor_block(a, z, base)
        })
        .collect();

    let mut offsets = Vec::with_capacity((hi - lo + 2) as usize);
    let mut pairs = Vec::new();
    offsets.push(0u32);
    for block in blocks {
        for f in block {
            pairs.extend_from_slice(&f);
            offsets.push(pairs.len() as u32);
        }
    }
    Ok(RangeFactorization { lo, offsets, pairs })
}

fn factor_block(a: u64, z: u64, base: &[u64]) -> Vec<Vec<(u64, u32)>> {
    let width = (z - a + 1) as usize;
    let mut rest: Vec<u64> = (a..=z).collect();
    let mut out: Vec<Vec<(u64, u32)>> = vec![Vec::new(); width];
    for &p in base {
        if p * p > z {
            break;
        }
        let mut m = a.div_ceil(p) * p;
        while m <= z {
            let i = (m - a) as usize;
            let mut e = 0;
            while rest[i].is_multiple_of(p) {
                rest[i] /= p;
                e += 1;
            }
            out[i].push((p, e));
            m += p;
        }
    }
    for (i, f) in out.iter_mut().enumerate() {
        if rest[i] > 1 {
            f.push((rest[i], 1));
        }
    }
    out
}
