//! Exact combinatorics of integer partitions and the coefficient identities
//! that drive the construction.

mod algebra;
mod types;

pub use algebra::{
    e_coefficient, e_coefficient_f64, gamma_m, gamma_m_by_partitions, identity_report, q_set,
    verify_coefficient_system, w_coefficient, w_coefficient_by_partitions, CoefficientTable,
    IdentityCheck, IdentityReport, SystemResidual,
};
pub use types::{
    distinct_orderings, enumerate_partitions, partition_relations, perm_count, Partition,
    Relations,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("partitions have positive parts only")]
    ZeroPart,
    #[error("the empty partition has no permutation count")]
    Empty,
    #[error("{small} is not contained in {big}")]
    NotSubset { small: String, big: String },
    #[error("parameter {m} outside the supported range [{lo}, {hi}]")]
    MOutOfRange { m: u32, lo: u32, hi: u32 },
    #[error("N = {n} exceeds M = {m}")]
    NOutOfRange { n: u32, m: u32 },
    #[error("cannot parse partition {0:?}")]
    Parse(String),
}
