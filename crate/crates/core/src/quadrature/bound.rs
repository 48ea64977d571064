use serde::{Deserialize, Serialize};

use super::moments::{moments, MomentSet};
use super::slice::TestFunction;
use super::testfn::TestFunctionSpec;
use super::{QuadError, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkBoundRow {
    pub k: usize,
    pub minus_zk: f64,
    /// `(J/(2M^{k−1}))·k(1+λ)^{k−1}(δ²/(8M²) − C·δ³/M)`.
    pub lower_bound: f64,
    pub bound_holds: bool,
    /// Bump-center value `J[(1/M)^k − ½((1/M+δ/2)^k + (1/M−δ/2)^k)]`, negated.
    pub minus_zk_center_formula: f64,
    /// `(−Z_{k+1}·M)/(−Z_k)`; `None` for the last `k`.
    pub next_ratio: Option<f64>,
    pub next_ratio_center_formula: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkBoundReport {
    pub m: u32,
    pub delta: f64,
    pub j: f64,
    pub eps: f64,
    pub lambda: f64,
    pub c_const: f64,
    /// `J·δ²/(8M³)`, the leading term of the bound at `k = 2`.
    pub leading_k2: f64,
    /// `−Z_2` divided by `leading_k2`.
    pub k2_over_leading: f64,
    pub rows: Vec<ZkBoundRow>,
    pub moments: MomentSet,
}

/// `Z_k/J` from bump-center values of `u_1^k`, ignoring the `O(ξ²)` spread
/// over each bump.
pub fn zk_center_formula(m: usize, delta: f64, k: usize) -> f64 {
    let w = 1.0 / m as f64;
    let k = k as i32;
    w.powi(k) - 0.5 * ((w + delta / 2.0).powi(k) + (w - delta / 2.0).powi(k))
}

/// Checks `Z_k < 0` against the convexity lower bound for `k = 2..=k_max`.
pub fn zk_lower_bound_check(
    m: u32,
    delta: f64,
    k_max: usize,
    quad: &QuadratureConfig,
) -> Result<ZkBoundReport, QuadError> {
    if !m.is_multiple_of(2) {
        return Err(QuadError::InvalidSpec(format!("M must be even, got {m}")));
    }
    if k_max < 2 {
        return Err(QuadError::OutOfRange("the bound is stated for k >= 2".into()));
    }
    let tf = TestFunction::new(TestFunctionSpec::thm2(m, delta))?;
    let ms = moments(&tf, quad, k_max + 1)?;
    let mf = m as f64;
    let eps = delta / (2.0 * mf);
    let lambda = delta.powi(3) / mf;
    let c_const = 4.0 + eps + 2.0 * lambda;
    let j = ms.j;
    let mut rows = Vec::new();
    for k in 2..=k_max {
        let kf = k as f64;
        let lower = j / (2.0 * mf.powi(k as i32 - 1))
            * kf
            * (1.0 + lambda).powi(k as i32 - 1)
            * (delta * delta / (8.0 * mf * mf) - c_const * delta.powi(3) / mf);
        let minus_zk = -ms.z[k];
        let center = -zk_center_formula(m as usize, delta, k) * j;
        let next = -ms.z[k + 1];
        let next_center = -zk_center_formula(m as usize, delta, k + 1) * j;
        rows.push(ZkBoundRow {
            k,
            minus_zk,
            lower_bound: lower,
            bound_holds: minus_zk >= lower,
            minus_zk_center_formula: center,
            next_ratio: (k < k_max).then(|| next * mf / minus_zk),
            next_ratio_center_formula: (k < k_max).then(|| next_center * mf / center),
        });
    }
    let leading_k2 = j * delta * delta / (8.0 * mf.powi(3));
    Ok(ZkBoundReport {
        m,
        delta,
        j,
        eps,
        lambda,
        c_const,
        leading_k2,
        k2_over_leading: -ms.z[2] / leading_k2,
        rows,
        moments: ms,
    })
}
