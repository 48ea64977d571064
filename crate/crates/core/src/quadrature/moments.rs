use serde::{Deserialize, Serialize};

use crate::numeric::NeumaierSum;

use super::ball::{ball_rule, unit_sphere_area};
use super::slice::{slice_term, TestFunction};
use super::testfn::Variant;
use super::{QuadError, QuadratureConfig};

/// Simplex moments `Z_k = ∫_{U_M} u_1^k f_{1_M}(u)/(u_1⋯u_M)` and the
/// hyperplane bump integral `J`, all in the measure `du_1⋯du_{M−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m: u32,
    pub delta: f64,
    pub variant: Variant,
    pub sigma: i8,
    pub xi: f64,
    /// `Z_k` for `k = 0..=k_max`, at the finest level.
    pub z: Vec<f64>,
    /// `|Z_k(finest) − Z_k(previous level)|`.
    pub z_err: Vec<f64>,
    /// `Σ_terms |weight · term integral|`, the scale that cancellation in
    /// `Z_k` is measured against.
    pub z_mass: Vec<f64>,
    pub levels: Vec<u32>,
    /// `refinements[i][k]`: `Z_k` at `levels[i]`.
    pub refinements: Vec<Vec<f64>>,
    pub j: f64,
    pub j_closed_form: f64,
}

/// Relative floor below which successive refinements count as converged.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

impl MomentSet {
    pub fn k_max(&self) -> usize {
        self.z.len() - 1
    }

    /// Ratios `|Z(L_{i−1}) − Z(L_{i−2})| / |Z(L_i) − Z(L_{i−1})|` for moment `k`.
    pub fn refinement_ratios(&self, k: usize) -> Vec<f64> {
        let diffs: Vec<f64> = self
            .refinements
            .windows(2)
            .map(|w| (w[1][k] - w[0][k]).abs())
            .collect();
        diffs.windows(2).map(|d| d[0] / d[1]).collect()
    }

    /// True when every refinement step either shrank the difference at least
    /// fourfold or already sat at the roundoff floor.
    pub fn converges_at_order_two(&self, k: usize) -> bool {
        let floor = ROUNDOFF_FLOOR * self.z_mass[k].max(self.z[k].abs());
        let diffs: Vec<f64> = self
            .refinements
            .windows(2)
            .map(|w| (w[1][k] - w[0][k]).abs())
            .collect();
        diffs.len() >= 2
            && diffs
                .windows(2)
                .all(|d| d[1] <= floor || d[1] * 4.0 <= d[0])
    }
}

/// `J = |S^{d−1}| ξ^d · 8/(d(d+2)(d+4)) / √M` with `d = M − 1`.
pub fn j_closed_form(m: usize, xi: f64) -> f64 {
    let d = m - 1;
    let df = d as f64;
    unit_sphere_area(d) * xi.powi(d as i32) * 8.0 / (df * (df + 2.0) * (df + 4.0)) / (m as f64).sqrt()
}

pub fn moments(
    tf: &TestFunction,
    quad: &QuadratureConfig,
    k_max: usize,
) -> Result<MomentSet, QuadError> {
    let m = tf.m();
    if m < 2 {
        return Err(QuadError::OutOfRange("moments need M >= 2".into()));
    }
    let width = k_max + 1;
    let h = |w: &[f64], out: &mut [f64]| {
        let mut p = 1.0;
        for o in out.iter_mut() {
            *o = p;
            p *= w[0];
        }
    };
    let sizes = [m];
    let values = [1.0];
    let mut refinements = Vec::new();
    let mut levels = Vec::new();
    let mut mass = vec![0.0; width];
    let mut j = 0.0;
    let mut buf = vec![0.0; width];
    for level in quad.level_range() {
        let rule = ball_rule(m - 1, quad.subdivisions, level, quad.max_points)?;
        let mut acc = vec![NeumaierSum::new(); width];
        let mut abs_acc = vec![0.0; width];
        for (c, &wt) in tf.mix.centers.iter().zip(&tf.mix.weights) {
            slice_term(&tf.mix, c, &sizes, &values, &rule, &h, &mut buf);
            for k in 0..width {
                acc[k].add(wt * buf[k]);
                abs_acc[k] += (wt * buf[k]).abs();
            }
        }
        // J from the same rule: ∫_{B(ξ)} (1 − |s|²/ξ²)² ds / √M
        let mut jj = NeumaierSum::new();
        for i in 0..rule.len() {
            let t2: f64 = rule.point(i).iter().map(|x| x * x).sum();
            jj.add(rule.weights[i] * (1.0 - t2) * (1.0 - t2));
        }
        j = jj.value() * tf.mix.xi.powi(m as i32 - 1) / (m as f64).sqrt();
        mass = abs_acc;
        refinements.push(acc.iter().map(NeumaierSum::value).collect::<Vec<f64>>());
        levels.push(level);
    }
    let z = refinements.last().unwrap().clone();
    let z_err: Vec<f64> = if refinements.len() >= 2 {
        let prev = &refinements[refinements.len() - 2];
        z.iter().zip(prev).map(|(a, b)| (a - b).abs()).collect()
    } else {
        vec![f64::INFINITY; width]
    };
    for k in 0..width {
        let tol = quad.rel_tol * z[k].abs() + ROUNDOFF_FLOOR * mass[k];
        if z_err[k] > tol {
            return Err(QuadError::NotConverged {
                what: format!("Z_{k}"),
                estimate: z_err[k],
                tolerance: tol,
            });
        }
    }
    Ok(MomentSet {
        m: m as u32,
        delta: tf.spec.delta,
        variant: tf.spec.variant,
        sigma: tf.spec.sigma,
        xi: tf.mix.xi,
        z,
        z_err,
        z_mass: mass,
        levels,
        refinements,
        j,
        j_closed_form: j_closed_form(m, tf.mix.xi),
    })
}
