use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use super::gauss::gauss_legendre;
use super::QuadError;

/// Product rule on the closed unit ball of `R^d`: Gauss–Legendre in the
/// radius (weight `r^{d-1}` folded in) times a rule on the sphere.
#[derive(Debug)]
pub struct BallRule {
    pub dim: usize,
    /// Row-major, `dim` coordinates per node.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Node counts at a refinement level: radial, polar angles, azimuth.
pub fn node_counts(subdivisions: usize, level: u32) -> (usize, usize, usize) {
    let s = subdivisions.max(1) << level;
    (s, s, 2 * s)
}

/// Predicted number of ball nodes, for budget checks before building.
pub fn ball_rule_size(dim: usize, subdivisions: usize, level: u32) -> usize {
    let (nr, nphi, ntheta) = node_counts(subdivisions, level);
    match dim {
        0 => 1,
        1 => 2 * nr,
        _ => nr.saturating_mul(ntheta).saturating_mul(nphi.saturating_pow(dim as u32 - 2)),
    }
}

fn sphere_rule(dim: usize, nphi: usize, ntheta: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    // unit sphere S^{dim-1} in R^dim
    match dim {
        1 => (vec![vec![-1.0], vec![1.0]], vec![1.0, 1.0]),
        2 => {
            let h = 2.0 * PI / ntheta as f64;
            let pts = (0..ntheta)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            (pts, vec![h; ntheta])
        }
        _ => {
            // polar coordinate t = cos φ carries the weight (1 − t²)^{(dim−3)/2}
            let (lower, lw) = sphere_rule(dim - 1, nphi, ntheta);
            let (ts, tw) = polar_rule(dim, nphi);
            let mut pts = Vec::with_capacity(ts.len() * lower.len());
            let mut wts = Vec::with_capacity(ts.len() * lower.len());
            for (&t, &w) in ts.iter().zip(&tw) {
                let s = (1.0 - t * t).max(0.0).sqrt();
                for (eta, &ew) in lower.iter().zip(&lw) {
                    let mut p = Vec::with_capacity(dim);
                    p.push(t);
                    p.extend(eta.iter().map(|e| s * e));
                    pts.push(p);
                    wts.push(w * ew);
                }
            }
            (pts, wts)
        }
    }
}

/// Nodes and weights for `∫_{-1}^{1} g(t) (1 − t²)^{(dim−3)/2} dt`, exact
/// for polynomial `g` of degree below `2n`: Gauss–Legendre for odd `dim`,
/// Gauss–Chebyshev of the second kind for even `dim`.
fn polar_rule(dim: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    if dim % 2 == 1 {
        let (t, w) = gauss_legendre(n);
        let e = (dim as i32 - 3) / 2;
        let w = t.iter().zip(&w).map(|(&t, &w)| w * (1.0 - t * t).powi(e)).collect();
        (t, w)
    } else {
        let e = (dim as i32 - 4) / 2;
        let h = PI / (n + 1) as f64;
        (1..=n)
            .map(|i| {
                let (s, c) = (i as f64 * h).sin_cos();
                (c, h * s * s * (1.0 - c * c).powi(e))
            })
            .unzip()
    }
}

fn build(dim: usize, subdivisions: usize, level: u32) -> BallRule {
    if dim == 0 {
        return BallRule {
            dim: 0,
            points: Vec::new(),
            weights: vec![1.0],
        };
    }
    let (nr, nphi, ntheta) = node_counts(subdivisions, level);
    let (rx, rw) = gauss_legendre(nr);
    let (sph, sw) = sphere_rule(dim, nphi, ntheta);
    let mut points = Vec::with_capacity(nr * sph.len() * dim);
    let mut weights = Vec::with_capacity(nr * sph.len());
    for (&x, &w) in rx.iter().zip(&rw) {
        let r = 0.5 * (x + 1.0);
        let rwt = 0.5 * w * r.powi(dim as i32 - 1);
        for (eta, &ew) in sph.iter().zip(&sw) {
            points.extend(eta.iter().map(|e| r * e));
            weights.push(rwt * ew);
        }
    }
    BallRule {
        dim,
        points,
        weights,
    }
}

type RuleKey = (usize, usize, u32);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<BallRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<BallRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared, lazily built rule; fails when it would exceed `max_points`.
pub fn ball_rule(
    dim: usize,
    subdivisions: usize,
    level: u32,
    max_points: usize,
) -> Result<Arc<BallRule>, QuadError> {
    let size = ball_rule_size(dim, subdivisions, level);
    if size > max_points {
        return Err(QuadError::BudgetExceeded {
            points: size,
            budget: max_points,
        });
    }
    let key = (dim, subdivisions, level);
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build(dim, subdivisions, level));
    cache().lock().unwrap().entry(key).or_insert(rule.clone());
    Ok(rule)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        d as f64 * unit_ball_volume(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_and_moments() {
        for d in 1..=5 {
            let rule = ball_rule(d, 2, 2, 1 << 22).unwrap();
            let vol: f64 = rule.weights.iter().sum();
            assert!((vol - unit_ball_volume(d)).abs() < 1e-12 * vol, "d={d} {}", vol - unit_ball_volume(d));
            // ∫ |x|^2 = |S| / (d + 2)
            let m2: f64 = (0..rule.len())
                .map(|i| rule.weights[i] * rule.point(i).iter().map(|x| x * x).sum::<f64>())
                .sum();
            assert!((m2 - unit_sphere_area(d) / (d as f64 + 2.0)).abs() < 1e-12, "d={d}");
            // odd moments vanish
            let m1: f64 = (0..rule.len()).map(|i| rule.weights[i] * rule.point(i)[0]).sum();
            assert!(m1.abs() < 1e-13);
        }
    }

    #[test]
    fn anisotropic_polynomial() {
        // ∫_{B^3} x^2 y^2 = 4π/105
        let rule = ball_rule(3, 2, 2, 1 << 22).unwrap();
        let q: f64 = (0..rule.len())
            .map(|i| {
                let p = rule.point(i);
                rule.weights[i] * p[0] * p[0] * p[1] * p[1]
            })
            .sum();
        assert!((q - 4.0 * PI / 105.0).abs() < 1e-12, "{}", q - 4.0 * PI / 105.0);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            ball_rule(4, 2, 6, 1000),
            Err(QuadError::BudgetExceeded { .. })
        ));
        assert_eq!(ball_rule(0, 2, 0, 1).unwrap().len(), 1);
    }
}
