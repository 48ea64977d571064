//! Classical multiplicative and von Mangoldt-type functions.

use crate::numeric::{NeumaierSum, REDUCTION_CHUNK};

use super::{factorize, sieve_primes, ArithError, Factorization};

/// Möbius function from a factorization.
pub fn mobius(f: &Factorization) -> i8 {
    mobius_of(&f.prime_powers)
}

pub fn mobius_of(pp: &[(u64, u32)]) -> i8 {
    if pp.iter().any(|&(_, e)| e >= 2) {
        0
    } else if pp.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Liouville function `(-1)^Ω(n)`.
pub fn liouville(f: &Factorization) -> i8 {
    liouville_of(&f.prime_powers)
}

pub fn liouville_of(pp: &[(u64, u32)]) -> i8 {
    let big_omega: u32 = pp.iter().map(|&(_, e)| e).sum();
    if big_omega.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Λ(n)`: `log p` on prime powers, zero elsewhere.
pub fn von_mangoldt_of(pp: &[(u64, u32)]) -> f64 {
    match pp {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

/// `Λ_k(n) = Σ_{d|n} μ(d) log^k(n/d)` from a factorization.
///
/// Only squarefree `d` contribute, so the sum runs over subsets of the
/// distinct primes. `Λ_k` vanishes identically once `n` has more than `k`
/// distinct prime factors; that case returns an exact zero instead of the
/// rounding residue of the divisor sum. `Λ_1` is returned as `Λ` exactly.
pub fn lambda_k_of(pp: &[(u64, u32)], k: u32) -> f64 {
    if k == 0 {
        // Σ_{d|n} μ(d) = [n = 1]
        return if pp.is_empty() { 1.0 } else { 0.0 };
    }
    if pp.len() > k as usize {
        return 0.0;
    }
    if k == 1 {
        return von_mangoldt_of(pp);
    }
    let logs: Vec<f64> = pp.iter().map(|&(p, _)| (p as f64).ln()).collect();
    let log_n: f64 = pp
        .iter()
        .zip(&logs)
        .map(|(&(_, e), &l)| e as f64 * l)
        .sum();
    let mut acc = NeumaierSum::new();
    for mask in 0u32..(1 << pp.len()) {
        let log_d: f64 = (0..pp.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| logs[i])
            .sum();
        let term = (log_n - log_d).powi(k as i32);
        if mask.count_ones() % 2 == 0 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    acc.value().max(0.0)
}

/// `Λ_k(n)` for a bare integer, factoring by trial division.
pub fn lambda_k(n: u64, k: u32) -> f64 {
    lambda_k_of(&factor_small(n).prime_powers, k)
}

fn factor_small(n: u64) -> Factorization {
    let mut rest = n;
    let mut pp = Vec::new();
    let mut d = 2u64;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            let mut e = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                e += 1;
            }
            pp.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        pp.push((rest, 1));
    }
    Factorization {
        n,
        prime_powers: pp,
    }
}

/// Independent evaluation of `Λ_k(n)` through the recursion
/// `Λ_{j+1} = Λ_j · log + Λ_j ∗ Λ`, run over the divisor lattice of `n`.
pub fn lambda_k_oracle(n: u64, k: u32) -> f64 {
    assert!(n >= 1 && k >= 1);
    let f = factor_small(n);
    let mut divisors = vec![1u64];
    for &(p, e) in &f.prime_powers {
        let base = divisors.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divisors.extend(base.iter().map(|d| d * pk));
        }
    }
    divisors.sort_unstable();
    let index = |d: u64| divisors.binary_search(&d).unwrap();
    let vm: Vec<f64> = divisors
        .iter()
        .map(|&d| von_mangoldt_of(&factor_small(d).prime_powers))
        .collect();
    let mut cur = vm.clone();
    for _ in 1..k {
        let next: Vec<f64> = divisors
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let mut acc = NeumaierSum::new();
                acc.add(cur[i] * (m as f64).ln());
                for &d in divisors.iter().take_while(|&&d| d <= m) {
                    if m % d == 0 {
                        acc.add(cur[index(d)] * vm[index(m / d)]);
                    }
                }
                acc.value()
            })
            .collect();
        cur = next;
    }
    cur[index(n)]
}

/// `ψ(x) = Σ_{n≤x} Λ(n)`.
///
/// The summation order matches [`crate::numeric::chunked_sum`] over the
/// dense sequence `Λ(1), …, Λ(x)`, so a chunked scan of `Λ` over `(0, x]`
/// reproduces this value bit for bit.
pub fn chebyshev_psi(x: u64) -> Result<f64, ArithError> {
    if x < 2 {
        return Err(ArithError::InvertedRange { lo: 2, hi: x });
    }
    let table = sieve_primes(2, x)?;
    let mut powers: Vec<(u64, f64)> = Vec::with_capacity(table.len() + 64);
    for &p in &table.primes {
        let lp = (p as f64).ln();
        let mut q = p;
        loop {
            powers.push((q, lp));
            match q.checked_mul(p) {
                Some(next) if next <= x => q = next,
                _ => break,
            }
        }
    }
    powers.sort_unstable_by_key(|&(n, _)| n);
    let mut total = NeumaierSum::new();
    for chunk in powers.chunk_by(|a, b| (a.0 - 1) / CHUNK == (b.0 - 1) / CHUNK) {
        let part: NeumaierSum = chunk.iter().map(|&(_, l)| l).collect();
        total.merge(&part);
    }
    Ok(total.value())
}

const CHUNK: u64 = REDUCTION_CHUNK as u64;

/// Convenience wrapper used by tests and the CLI.
pub fn factorize_trial(n: u64) -> Result<Factorization, ArithError> {
    let table = sieve_primes(2, n.isqrt().max(2))?;
    factorize(n, &table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_lambda_k(n: u64, k: u32) -> f64 {
        (1..=n)
            .filter(|d| n.is_multiple_of(*d))
            .map(|d| {
                let mu = mobius(&factor_small(d)) as f64;
                mu * ((n / d) as f64).ln().powi(k as i32)
            })
            .sum()
    }

    #[test]
    fn mobius_and_liouville_examples() {
        let one = Factorization::one();
        assert_eq!((mobius(&one), liouville(&one)), (1, 1));
        let six = factor_small(6);
        assert_eq!((mobius(&six), liouville(&six)), (1, 1));
        let twelve = factor_small(12);
        assert_eq!((mobius(&twelve), liouville(&twelve)), (0, -1));
    }

    #[test]
    fn lambda_k_examples() {
        for k in 1..6 {
            assert_eq!(lambda_k(1, k), 0.0);
        }
        assert_eq!(lambda_k(8, 1), 2f64.ln());
        let expected = 2.0 * 2f64.ln() * 3f64.ln();
        assert!((lambda_k(12, 2) - expected).abs() < 1e-12);
        assert!((lambda_k(12, 2) - 1.5229).abs() < 2e-4);
    }

    #[test]
    fn oracle_examples() {
        let l7 = 7f64.ln();
        assert!((lambda_k_oracle(7, 2) - l7 * l7).abs() < 1e-12);
        let l6 = 2.0 * 2f64.ln() * 3f64.ln();
        assert!((lambda_k_oracle(6, 2) - l6).abs() < 1e-12);
        let brute = brute_lambda_k(30, 3);
        assert!((lambda_k_oracle(30, 3) - brute).abs() < 1e-9 * brute);
        assert!((lambda_k(30, 3) - brute).abs() < 1e-9 * brute);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(chebyshev_psi(2).unwrap(), 2f64.ln());
        // prime powers up to 10: 2, 3, 4, 5, 7, 8, 9
        let expected = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((chebyshev_psi(10).unwrap() - expected).abs() < 1e-12);
        assert!((chebyshev_psi(10).unwrap() - 2520f64.ln()).abs() < 1e-12);
        assert!(chebyshev_psi(1).is_err());
    }

    #[test]
    fn psi_matches_dense_chunked_scan() {
        let x = 100_000u64;
        let aux = sieve_primes(2, 400).unwrap();
        let rf = super::super::factor_range(1, x, &aux).unwrap();
        let dense = crate::numeric::chunked_sum(x as usize, |i| von_mangoldt_of(rf.get(i as u64 + 1)));
        assert_eq!(dense.to_bits(), chebyshev_psi(x).unwrap().to_bits());
    }
}
