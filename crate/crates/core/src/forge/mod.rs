//! The weighted sequence `a_n = 1 + b_n` on a window of integers.

mod classes;
mod config;
mod slab;
mod weights;

pub use classes::{
    build_prime_classes, class_bounds, enumerate_class, sieve_class_tables, small_class_bound, ClassEntry,
    PrimeClassSet,
};
pub use config::{
    interval_schedule, CheckedWindow, IntervalStep, SigmaSchedule, Violation, WindowConfig,
    WindowMode,
};
pub use slab::{
    assemble_slab, assemble_slab_range, content_hash, selberg_sequence, BuildOptions, SlabEntry,
    SlabHeader, SlabKind, SlabStats, WeightedSlab, SLAB_MAGIC,
};
pub use weights::{evaluate_b, log_vector, MemoGrid, MEMO_STEP};

use crate::arith::ArithError;
use crate::quadrature::QuadError;

#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error("invalid window: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<Violation>),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("prime table covers [{}, {}], need [{}, {}]", .covered.0, .covered.1, .needed.0, .needed.1)]
    Coverage { needed: (u64, u64), covered: (u64, u64) },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("bad slab file: {0}")]
    BadSlabFile(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
