//! Primes, factorizations and the classical arithmetic functions.

mod cache;
mod factor;
mod functions;
mod sieve;

pub use cache::{read_prime_table, write_prime_table, write_prime_table_csv, PRIME_TABLE_MAGIC};
pub use factor::{factor_range, factorize, Factorization, RangeFactorization};
pub use functions::{
    chebyshev_psi, factorize_trial, lambda_k, lambda_k_of, lambda_k_oracle, liouville,
    liouville_of, mobius, mobius_of, von_mangoldt_of,
};
pub use sieve::{sieve_primes, sieve_primes_with, PrimeTable, SieveConfig};

#[derive(Debug, thiserror::Error)]
pub enum ArithError {
    #[error("invalid range [{lo}, {hi}]: need 2 <= lo <= hi")]
    InvertedRange { lo: u64, hi: u64 },
    #[error("range of {len} integers exceeds the budget of {budget}")]
    RangeTooLarge { len: u64, budget: u64 },
    #[error("prime table must cover primes up to {needed}, covers up to {covered}")]
    InsufficientTable { needed: u64, covered: u64 },
    #[error("argument must be a positive integer")]
    NonPositive,
    #[error("malformed prime table file: {0}")]
    BadCacheFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
