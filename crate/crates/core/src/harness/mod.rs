//! Measurements on built slabs: divisor-sum remainders, weighted prime and
//! almost-prime sums, parity sums, and the prime-tuple counting check.

mod lemma2;
mod moments;
mod remainder;

pub use lemma2::{lemma2_check, Lemma2Check};
pub use moments::{moment_scan, MomentReport, MomentRow};
pub use remainder::{
    class_cancellation, hooley_progression_bias, remainder_scan, CancellationRow, RemainderReport,
    RemainderRow, MAX_DIVISOR_SCAN,
};

use crate::arith::{factor_range, sieve_primes, ArithError, RangeFactorization};
use crate::forge::{ForgeError, WeightedSlab};
use crate::quadrature::QuadError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    BadParameter(String),
    #[error("{beta} is not in Q (need Σβ <= M − 2 = {limit})")]
    NotInQ { beta: String, limit: u32 },
    #[error("{d} is not a product of one prime from each class of {beta}")]
    NotInDBeta { d: u64, beta: String },
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("{what} needs {needed} items, budget is {budget}")]
    TooLarge {
        what: String,
        needed: u64,
        budget: u64,
    },
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// A slab together with the factorization of its window and dense weights.
pub struct SlabContext<'a> {
    pub slab: &'a WeightedSlab,
    pub factors: RangeFactorization,
    /// `b_n` at index `n − lo − 1`.
    pub b: Vec<f64>,
}

impl<'a> SlabContext<'a> {
    pub fn new(slab: &'a WeightedSlab) -> Result<Self, HarnessError> {
        let (lo, hi) = (slab.header.lo, slab.header.hi);
        if lo >= hi {
            return Err(HarnessError::BadParameter(format!("empty window ({lo}, {hi}]")));
        }
        let aux = sieve_primes(2, hi.isqrt().max(2))?;
        let factors = factor_range(lo + 1, hi, &aux)?;
        Ok(Self {
            slab,
            factors,
            b: slab.dense_b(),
        })
    }

    pub fn lo(&self) -> u64 {
        self.slab.header.lo
    }

    pub fn hi(&self) -> u64 {
        self.slab.header.hi
    }

    pub fn y(&self) -> f64 {
        (self.hi() - self.lo()) as f64
    }

    /// The `x` used in `log x` normalizations: the window start, or the end
    /// for windows starting below 2.
    pub fn x_ref(&self) -> u64 {
        if self.lo() >= 2 {
            self.lo()
        } else {
            self.hi()
        }
    }

    pub fn log_x(&self) -> f64 {
        (self.x_ref() as f64).ln()
    }
}
