//! Test functions and their integrals over simplices and simplex slices.

mod ball;
mod bound;
mod gauss;
pub mod grid;
mod identity;
mod moments;
mod slice;
mod testfn;

use serde::{Deserialize, Serialize};

pub use ball::{ball_rule, ball_rule_size, unit_ball_volume, unit_sphere_area, BallRule};
pub use bound::{zk_center_formula, zk_lower_bound_check, ZkBoundReport, ZkBoundRow};
pub use gauss::{gauss_legendre, gauss_legendre_on};
pub use identity::{verify_main_identity, MainIdentityCheck};
pub use moments::{j_closed_form, moments, MomentSet, ROUNDOFF_FLOOR};
pub use slice::{simplex_integral, TestFunction};
pub use testfn::{
    bump, f_one_m, observed_gradient_sup, shift_set, BumpMixture, CustomBump, CustomBumps,
    TestFunctionSpec, Variant,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("invalid test function: {0}")]
    InvalidSpec(String),
    #[error("coordinates sum to {sum}, expected 1")]
    SumNotOne { sum: f64 },
    #[error("{what} did not converge: estimate {estimate:e} above tolerance {tolerance:e}")]
    NotConverged {
        what: String,
        estimate: f64,
        tolerance: f64,
    },
    #[error("rule with {points} nodes exceeds the budget of {budget}")]
    BudgetExceeded { points: usize, budget: usize },
    #[error("{beta} is not in Q (need Σβ <= M − 2)")]
    NotInQ { beta: String },
    #[error("{0}")]
    OutOfRange(String),
}

/// Refinement schedule for the ball rules. Level `L` uses
/// `subdivisions·2^L` radial and polar nodes and twice that in azimuth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub subdivisions: usize,
    pub base_level: u32,
    /// Number of levels evaluated, starting at `base_level`.
    pub levels: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            subdivisions: 2,
            base_level: 0,
            levels: 4,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_points: 1 << 22,
        }
    }
}

impl QuadratureConfig {
    pub fn finest_level(&self) -> u32 {
        self.base_level + self.levels.max(1) - 1
    }

    pub fn level_range(&self) -> std::ops::RangeInclusive<u32> {
        self.base_level..=self.finest_level()
    }
}
