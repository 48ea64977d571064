use crate::numeric::NeumaierSum;
use crate::partition::{e_coefficient_f64, Partition};

use super::ball::{ball_rule, BallRule};
use super::testfn::{f_one_m, BumpMixture, TestFunctionSpec};
use super::{QuadError, QuadratureConfig};

/// Position of the point of the slice `{block sums = values}` closest to
/// `center`, and the squared distance between them.
pub(crate) fn slice_foot(center: &[f64], sizes: &[usize], values: &[f64]) -> (Vec<f64>, f64) {
    let mut p = Vec::with_capacity(center.len());
    let mut dist2 = 0.0;
    let mut off = 0;
    for (&a, &v) in sizes.iter().zip(values) {
        let block = &center[off..off + a];
        let gap = v - block.iter().sum::<f64>();
        dist2 += gap * gap / a as f64;
        p.extend(block.iter().map(|c| c + gap / a as f64));
        off += a;
    }
    (p, dist2)
}

/// Adds `Σ_k s_k e_k` to `w`, with `e_k` the Helmert basis of the zero-sum
/// subspace of each block.
fn add_block_offsets(w: &mut [f64], sizes: &[usize], s: &[f64]) {
    let mut woff = 0;
    let mut soff = 0;
    for &a in sizes {
        for k in 1..a {
            let sk = s[soff + k - 1];
            let norm = ((k * (k + 1)) as f64).sqrt();
            let up = sk / norm;
            for wi in &mut w[woff..woff + k] {
                *wi += up;
            }
            w[woff + k] -= sk * k as f64 / norm;
        }
        woff += a;
        soff += a.saturating_sub(1);
    }
}

/// `(1/∏√a_j) ∫ ℓ(w − c; ξ) · G(w)` over the slice `{block sums = values}` in
/// the measure `∏_j dw_{1j}⋯dw_{a_j−1,j}`, where
/// `G = prefactor(w)·h(w)/∏w` and `h` writes `out.len()` values.
///
/// The slice is parametrized by its orthonormal offset `s` from the foot
/// point `p`, so the bump reduces to `((ρ² − |s|²)/ξ²)²` on a ball of radius
/// `ρ = sqrt(ξ² − |p − c|²)`.
pub(crate) fn slice_term<F>(
    mix: &BumpMixture,
    center: &[f64],
    sizes: &[usize],
    values: &[f64],
    rule: &BallRule,
    h: &F,
    out: &mut [f64],
) where
    F: Fn(&[f64], &mut [f64]),
{
    out.iter_mut().for_each(|o| *o = 0.0);
    let (p, dist2) = slice_foot(center, sizes, values);
    let rho2 = mix.xi * mix.xi - dist2;
    if rho2 <= 0.0 {
        return;
    }
    let dim = rule.dim;
    debug_assert_eq!(dim, mix.m - sizes.len());
    let rho = rho2.sqrt();
    let xi2 = mix.xi * mix.xi;
    let block_scale: f64 = sizes.iter().map(|&a| (a as f64).sqrt()).product();
    let width = out.len();
    let mut acc = vec![NeumaierSum::new(); width];
    let mut hv = vec![0.0; width];
    let mut w = vec![0.0; p.len()];
    let mut s = vec![0.0; dim];
    for i in 0..rule.len() {
        let t = rule.point(i);
        let t2: f64 = t.iter().map(|x| x * x).sum();
        let b = rho2 * (1.0 - t2) / xi2;
        let bump = b * b;
        if bump == 0.0 {
            continue;
        }
        for (sj, tj) in s.iter_mut().zip(t) {
            *sj = rho * tj;
        }
        w.copy_from_slice(&p);
        add_block_offsets(&mut w, sizes, &s);
        let prod: f64 = w.iter().product();
        if prod <= 0.0 {
            continue;
        }
        let g = if mix.product_prefactor { 1.0 } else { 1.0 / prod };
        h(&w, &mut hv);
        let scale = rule.weights[i] * bump * g;
        for (a, &v) in acc.iter_mut().zip(&hv) {
            a.add(scale * v);
        }
    }
    let vol = rho.powi(dim as i32) / block_scale;
    for (o, a) in out.iter_mut().zip(&acc) {
        *o = vol * a.value();
    }
}

/// `Σ_terms weight · slice_term` with `h ≡ 1`.
pub(crate) fn slice_integral(
    mix: &BumpMixture,
    sizes: &[usize],
    values: &[f64],
    rule: &BallRule,
) -> f64 {
    let one = |_: &[f64], o: &mut [f64]| o[0] = 1.0;
    let mut buf = [0.0];
    let mut acc = NeumaierSum::new();
    for (c, &wt) in mix.centers.iter().zip(&mix.weights) {
        slice_term(mix, c, sizes, values, rule, &one, &mut buf);
        acc.add(wt * buf[0]);
    }
    acc.value()
}

/// `∫_{U_r} f(u)/(u_1⋯u_r) du_1⋯du_{r−1}` for a bump mixture on `r`
/// coordinates, checked against the next coarser level. For `r = 1` this is
/// `f(1)`.
pub fn simplex_integral(mix: &BumpMixture, quad: &QuadratureConfig) -> Result<f64, QuadError> {
    if mix.m == 1 {
        return Ok(mix.eval(&[1.0]));
    }
    let at = |level| -> Result<f64, QuadError> {
        let rule = ball_rule(mix.m - 1, quad.subdivisions, level, quad.max_points)?;
        Ok(slice_integral(mix, &[mix.m], &[1.0], &rule))
    };
    let fine = quad.finest_level();
    let val = at(fine)?;
    if fine > 0 {
        let coarse = at(fine - 1)?;
        let tol = quad.rel_tol * val.abs() + quad.abs_tol;
        if (val - coarse).abs() > tol {
            return Err(QuadError::NotConverged {
                what: "simplex integral".into(),
                estimate: (val - coarse).abs(),
                tolerance: tol,
            });
        }
    }
    Ok(val)
}

/// A validated test function together with its bump representation.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub spec: TestFunctionSpec,
    pub mix: BumpMixture,
}

impl TestFunction {
    pub fn new(spec: TestFunctionSpec) -> Result<Self, QuadError> {
        let mix = spec.validate()?;
        Ok(Self { spec, mix })
    }

    pub fn m(&self) -> usize {
        self.mix.m
    }

    pub fn f_one_m(&self, u: &[f64]) -> Result<f64, QuadError> {
        f_one_m(&self.mix, u)
    }

    /// Class index `i` with `x ∈ J_i`, if any.
    pub fn class_of(&self, x: f64) -> Option<u32> {
        (1..=self.spec.m).find(|&i| {
            let (lo, hi) = self.spec.class_interval(i);
            lo <= x && x <= hi
        })
    }

    /// Block sizes for `v` under `α`, or `None` when the coordinates do not
    /// fall into the classes of `α`.
    pub fn block_layout(&self, v: &[f64], alpha: &Partition) -> Option<Vec<usize>> {
        if v.len() != alpha.len() {
            return None;
        }
        let mut classes = Vec::with_capacity(v.len());
        for &x in v {
            classes.push(self.class_of(x)?);
        }
        let mut sorted = classes.clone();
        sorted.sort_unstable();
        (sorted == alpha.parts()).then(|| classes.iter().map(|&c| c as usize).collect())
    }

    /// `f_α(v)` at one quadrature level, no convergence check.
    pub fn f_alpha_at_level(
        &self,
        v: &[f64],
        alpha: &Partition,
        quad: &QuadratureConfig,
        level: u32,
    ) -> Result<f64, QuadError> {
        check_alpha(alpha, self.spec.m)?;
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(QuadError::SumNotOne { sum: s });
        }
        if alpha.len() == self.m() {
            return Ok(self.mix.eval(v));
        }
        let Some(sizes) = self.block_layout(v, alpha) else {
            return Ok(0.0);
        };
        let rule = ball_rule(self.m() - alpha.len(), quad.subdivisions, level, quad.max_points)?;
        let prod: f64 = v.iter().product();
        Ok(e_coefficient_f64(alpha) * prod * slice_integral(&self.mix, &sizes, v, &rule))
    }

    /// `f_α(v)` for `v` indexed like the parts of `α` in any order. Returns 0
    /// outside `J_{α_1} × ⋯ × J_{α_r}` up to permutation.
    ///
    /// Evaluated at the finest level and checked against the next coarser
    /// one.
    pub fn f_alpha(&self, v: &[f64], alpha: &Partition, quad: &QuadratureConfig) -> Result<f64, QuadError> {
        let fine = quad.finest_level();
        let val = self.f_alpha_at_level(v, alpha, quad, fine)?;
        if alpha.len() == self.m() || fine == 0 {
            return Ok(val);
        }
        let coarse = self.f_alpha_at_level(v, alpha, quad, fine - 1)?;
        let tol = quad.rel_tol * val.abs() + quad.abs_tol;
        if (val - coarse).abs() > tol {
            return Err(QuadError::NotConverged {
                what: format!("f_{alpha} at {v:?}"),
                estimate: (val - coarse).abs(),
                tolerance: tol,
            });
        }
        Ok(val)
    }
}

pub(crate) fn check_alpha(alpha: &Partition, m: u32) -> Result<(), QuadError> {
    if alpha.sum() != m {
        return Err(QuadError::OutOfRange(format!("{alpha} is not a partition of {m}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmert_offsets_keep_block_sums() {
        let sizes = [1, 3, 2];
        let mut w = vec![0.0; 6];
        add_block_offsets(&mut w, &sizes, &[0.3, -0.7, 1.1]);
        assert_eq!(w[0], 0.0);
        assert!((w[1] + w[2] + w[3]).abs() < 1e-15);
        assert!((w[4] + w[5]).abs() < 1e-15);
        let n2: f64 = w.iter().map(|x| x * x).sum();
        assert!((n2 - (0.09 + 0.49 + 1.21)).abs() < 1e-14);
    }

    #[test]
    fn f_alpha_of_full_partition_is_f_one_m() {
        let tf = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, -1)).unwrap();
        let q = QuadratureConfig::default();
        let u = [0.34, 0.33, 0.33];
        let a = tf.f_alpha(&u, &Partition::ones(3), &q).unwrap();
        assert_eq!(a, tf.f_one_m(&u).unwrap());
    }

    #[test]
    fn f_alpha_vanishes_off_classes() {
        let tf = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, 1)).unwrap();
        let q = QuadratureConfig::default();
        let a = Partition::new(vec![1, 2]).unwrap();
        assert_eq!(tf.f_alpha(&[0.5, 0.5], &a, &q).unwrap(), 0.0);
        assert!(tf.f_alpha(&[0.3, 0.3], &a, &q).is_err());
        let inside = tf.f_alpha(&[1.0 / 3.0, 2.0 / 3.0], &a, &q).unwrap();
        let swapped = tf.f_alpha(&[2.0 / 3.0, 1.0 / 3.0], &a, &q).unwrap();
        assert!(inside != 0.0);
        assert_eq!(inside, swapped);
    }
}
