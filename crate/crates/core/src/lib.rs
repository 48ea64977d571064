//! Counterexample sequences for the asymptotic sieve.
//!
//! The crate builds weighted sequences `a_n = 1 + b_n` on a window of
//! integers whose divisor sums look like those of the integers while their
//! prime and almost-prime weighted sums are biased, and provides the exact
//! and numerical machinery to check both properties.

// parameter guards are written as `!(a < b)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod forge;
pub mod harness;
pub mod numeric;
pub mod partition;
pub mod pipeline;
pub mod quadrature;
