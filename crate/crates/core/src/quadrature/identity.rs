use serde::{Deserialize, Serialize};

use crate::numeric::NeumaierSum;
use crate::partition::{distinct_orderings, e_coefficient_f64, enumerate_partitions, Partition};

use super::ball::ball_rule;
use super::slice::{slice_foot, slice_term, TestFunction};
use super::{QuadError, QuadratureConfig};

/// Residual of the reduced cancellation identity at one point `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainIdentityCheck {
    pub beta: String,
    pub v: Vec<f64>,
    pub levels: Vec<u32>,
    /// One entry per level: the contribution of each `μ`, in `P(M − Σβ)` order.
    pub terms: Vec<Vec<f64>>,
    /// `|Σ_μ term_μ| / max_μ |term_μ|` per level.
    pub normalized: Vec<f64>,
    pub residual: f64,
}

impl MainIdentityCheck {
    /// Worst normalized residual at the finest level.
    pub fn final_normalized(&self) -> f64 {
        *self.normalized.last().unwrap()
    }

    /// Each refinement shrinks the normalized residual at least fourfold
    /// unless it already sits below `floor`.
    pub fn refines_fourfold(&self, floor: f64) -> bool {
        self.normalized
            .windows(2)
            .all(|w| w[1] <= floor || w[1] * 4.0 <= w[0])
    }
}

/// Orthonormal basis of the complement of the unit vector `n`, from the
/// Householder reflection that maps `n` to a coordinate axis.
fn complement_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let sign = if n[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = n.to_vec();
    u[0] += sign;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    (1..d)
        .map(|col| (0..d).map(|row| {
            let id = if row == col { 1.0 } else { 0.0 };
            id - 2.0 * u[row] * u[col] / uu
        }).collect())
        .collect()
}

/// Evaluates
/// `Σ_{μ∈P(M−Σβ)} (1/|μ|!) ∫_{V_{|μ|}(1−Σv)} f_{β+μ}(v, u)/(u_1⋯u_{|μ|})`
/// at every configured level.
///
/// Each `f_{β+μ}` is a sum of bump slices. For one bump with center `c` and
/// one ordering `ρ` of `μ`, the outer variables `u` only matter on an
/// ellipsoid around the block sums of `c`; in scaled coordinates
/// `t_j = (u_j − C_j)/√ρ_j` that ellipsoid meets the constraint
/// `Σu = 1 − Σv` in a ball of one dimension less, integrated with a ball rule.
pub fn verify_main_identity(
    tf: &TestFunction,
    beta: &Partition,
    v: &[f64],
    quad: &QuadratureConfig,
) -> Result<MainIdentityCheck, QuadError> {
    let m = tf.spec.m;
    if beta.sum() + 2 > m {
        return Err(QuadError::NotInQ { beta: beta.to_string() });
    }
    if v.len() != beta.len() {
        return Err(QuadError::OutOfRange(format!("{} values for {beta}", v.len())));
    }
    let layout = if beta.is_empty() {
        Vec::new()
    } else {
        tf.block_layout(v, beta).ok_or_else(|| {
            QuadError::OutOfRange(format!("{v:?} is not in the class box of {beta}"))
        })?
    };
    let rest = 1.0 - v.iter().sum::<f64>();
    if rest <= 0.0 {
        return Err(QuadError::OutOfRange("need Σv < 1".into()));
    }
    let prod_v: f64 = v.iter().product();
    let xi2 = tf.mix.xi * tf.mix.xi;
    let mus = enumerate_partitions(m - beta.sum());

    let mut levels = Vec::new();
    let mut all_terms = Vec::new();
    let mut normalized = Vec::new();
    for level in quad.level_range() {
        let mut terms = Vec::with_capacity(mus.len());
        for mu in &mus {
            let coef = e_coefficient_f64(&beta.plus(mu)) * prod_v
                / (1..=mu.len()).map(|i| i as f64).product::<f64>();
            let inner_dim = tf.m() - beta.len() - mu.len();
            let outer_dim = mu.len() - 1;
            let inner = ball_rule(inner_dim, quad.subdivisions, level, quad.max_points)?;
            let outer = ball_rule(outer_dim, quad.subdivisions, level, quad.max_points)?;
            let mut acc = NeumaierSum::new();
            for rho in distinct_orderings(mu) {
                let mut sizes = layout.clone();
                sizes.extend(rho.iter().map(|&r| r as usize));
                let nb = layout.len();
                let srho: f64 = rho.iter().map(|&r| r as f64).sum();
                let sq: Vec<f64> = rho.iter().map(|&r| (r as f64).sqrt()).collect();
                let normal: Vec<f64> = sq.iter().map(|s| s / srho.sqrt()).collect();
                let basis = if outer_dim > 0 { complement_basis(&normal) } else { Vec::new() };
                let jac: f64 = sq.iter().product::<f64>() / srho.sqrt();
                for (c, &wt) in tf.mix.centers.iter().zip(&tf.mix.weights) {
                    // part of the distance fixed by v
                    let off_b: usize = layout.iter().sum();
                    let (_, d_beta) = slice_foot(&c[..off_b], &layout, v);
                    let r2 = xi2 - d_beta;
                    if r2 <= 0.0 {
                        continue;
                    }
                    let mut cs = Vec::with_capacity(rho.len());
                    let mut off = off_b;
                    for &r in &rho {
                        cs.push(c[off..off + r as usize].iter().sum::<f64>());
                        off += r as usize;
                    }
                    let b = rest - cs.iter().sum::<f64>();
                    let sec2 = r2 - b * b / srho;
                    if sec2 <= 0.0 {
                        continue;
                    }
                    let sec = sec2.sqrt();
                    let t0: Vec<f64> = normal.iter().map(|n| n * b / srho.sqrt()).collect();
                    let mut values: Vec<f64> = v.to_vec();
                    values.resize(nb + rho.len(), 0.0);
                    let mut buf = [0.0];
                    let one = |_: &[f64], o: &mut [f64]| o[0] = 1.0;
                    let mut part = NeumaierSum::new();
                    for i in 0..outer.len() {
                        let tau = outer.point(i);
                        for j in 0..rho.len() {
                            let mut tj = t0[j];
                            for (k, bk) in basis.iter().enumerate() {
                                tj += sec * tau[k] * bk[j];
                            }
                            values[nb + j] = cs[j] + sq[j] * tj;
                        }
                        slice_term(&tf.mix, c, &sizes, &values, &inner, &one, &mut buf);
                        part.add(outer.weights[i] * buf[0]);
                    }
                    acc.add(wt * jac * sec.powi(outer_dim as i32) * part.value());
                }
            }
            terms.push(coef * acc.value());
        }
        let total: NeumaierSum = terms.iter().copied().collect();
        let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        normalized.push(if scale == 0.0 { 0.0 } else { total.value().abs() / scale });
        levels.push(level);
        all_terms.push(terms);
    }
    let residual = all_terms.last().unwrap().iter().copied().collect::<NeumaierSum>().value();
    Ok(MainIdentityCheck {
        beta: beta.to_string(),
        v: v.to_vec(),
        levels,
        terms: all_terms,
        normalized,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_basis_is_orthonormal() {
        let n = [0.6, 0.0, 0.8];
        let b = complement_basis(&n);
        assert_eq!(b.len(), 2);
        for (i, x) in b.iter().enumerate() {
            assert!(x.iter().zip(&n).map(|(a, c)| a * c).sum::<f64>().abs() < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let dot: f64 = x.iter().zip(y).map(|(a, c)| a * c).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn beta_outside_q_is_rejected() {
        let tf = TestFunction::new(crate::quadrature::TestFunctionSpec::thm1(3, 1.0 / 27.0, 1)).unwrap();
        let q = QuadratureConfig::default();
        let beta = Partition::new(vec![2]).unwrap();
        assert!(matches!(
            verify_main_identity(&tf, &beta, &[2.0 / 3.0], &q),
            Err(QuadError::NotInQ { .. })
        ));
    }
}
