use serde::{Deserialize, Serialize};

use super::QuadError;

/// `max(0, ξ^{-4}(ξ² − |v|²)²)`, zero outside the ball of radius `ξ`.
pub fn bump(v: &[f64], xi: f64) -> Result<f64, QuadError> {
    if xi <= 0.0 || xi.is_nan() {
        return Err(QuadError::InvalidSpec(format!("bump radius must be positive, got {xi}")));
    }
    Ok(bump_unchecked(v.iter().map(|x| x * x).sum(), xi))
}

#[inline]
pub(crate) fn bump_unchecked(r2: f64, xi: f64) -> f64 {
    let x2 = xi * xi;
    if r2 >= x2 {
        0.0
    } else {
        let t = (x2 - r2) / x2;
        t * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// One bump at the center, signed by `σ`.
    Thm1,
    /// `∏u` times a central bump minus the average of the shifted bumps.
    Thm2,
    /// User-supplied bumps.
    Custom,
}

impl std::str::FromStr for Variant {
    type Err = QuadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thm1" => Ok(Variant::Thm1),
            "thm2" => Ok(Variant::Thm2),
            "custom" => Ok(Variant::Custom),
            other => Err(QuadError::InvalidSpec(format!("unknown variant {other:?}"))),
        }
    }
}

/// A user-defined symmetric test function: `Σ weight·ℓ(u − center; radius)`,
/// optionally multiplied by `u_1⋯u_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBumps {
    pub radius: f64,
    #[serde(default)]
    pub product_prefactor: bool,
    pub bumps: Vec<CustomBump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBump {
    pub center: Vec<f64>,
    pub weight: f64,
}

/// Parameters of the top test function `f_{1_M}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub variant: Variant,
    pub m: u32,
    pub delta: f64,
    /// Sign choice, used by `thm1` only.
    #[serde(default = "default_sigma")]
    pub sigma: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomBumps>,
}

fn default_sigma() -> i8 {
    1
}

/// The test function as a weighted sum of translated bumps of one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpMixture {
    pub m: usize,
    pub xi: f64,
    pub product_prefactor: bool,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl BumpMixture {
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// `f_{1_M}(u)` with no check on `Σu`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, &w) in self.centers.iter().zip(&self.weights) {
            let r2: f64 = u.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += w * bump_unchecked(r2, self.xi);
        }
        if self.product_prefactor {
            acc * u.iter().product::<f64>()
        } else {
            acc
        }
    }

    /// Smallest coordinate the support can reach.
    pub fn support_min_coordinate(&self) -> f64 {
        self.centers
            .iter()
            .flat_map(|c| c.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b))
            - self.xi
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All vectors with `m/2` entries `+h` and `m/2` entries `−h`.
pub fn shift_set(m: usize, h: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == m / 2 {
            out.push((0..m).map(|i| if mask & (1 << i) != 0 { h } else { -h }).collect());
        }
    }
    out
}

impl TestFunctionSpec {
    pub fn thm1(m: u32, delta: f64, sigma: i8) -> Self {
        Self {
            variant: Variant::Thm1,
            m,
            delta,
            sigma,
            custom: None,
        }
    }

    pub fn thm2(m: u32, delta: f64) -> Self {
        Self {
            variant: Variant::Thm2,
            m,
            delta,
            sigma: 1,
            custom: None,
        }
    }

    /// The zero function, giving the unbiased sequence `a_n = 1`.
    pub fn zero(m: u32, delta: f64) -> Self {
        Self {
            variant: Variant::Custom,
            m,
            delta,
            sigma: 1,
            custom: Some(CustomBumps {
                radius: delta,
                product_prefactor: false,
                bumps: Vec::new(),
            }),
        }
    }

    /// Support floor `ε = 1/(2M)`.
    pub fn epsilon(&self) -> f64 {
        1.0 / (2.0 * self.m as f64)
    }

    pub fn center(&self) -> Vec<f64> {
        vec![1.0 / self.m as f64; self.m as usize]
    }

    pub fn xi(&self) -> f64 {
        match self.variant {
            Variant::Thm1 => self.delta,
            Variant::Thm2 => self.delta.powi(3),
            Variant::Custom => self.custom.as_ref().map_or(self.delta, |c| c.radius),
        }
    }

    /// `J_i = [i(1/M − δ), i(1/M + δ)]`.
    pub fn class_interval(&self, i: u32) -> (f64, f64) {
        let m = self.m as f64;
        (i as f64 * (1.0 / m - self.delta), i as f64 * (1.0 / m + self.delta))
    }

    /// Checks the declared invariants and returns the bump representation.
    pub fn validate(&self) -> Result<BumpMixture, QuadError> {
        let bad = |s: String| Err(QuadError::InvalidSpec(s));
        if self.m < 1 || self.m > 12 {
            return bad(format!("M = {} outside 1..=12", self.m));
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        let m = self.m as usize;
        let mix = match self.variant {
            Variant::Thm1 => {
                if self.sigma != 1 && self.sigma != -1 {
                    return bad(format!("sigma must be ±1, got {}", self.sigma));
                }
                let sign = if (self.m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
                BumpMixture {
                    m,
                    xi: self.delta,
                    product_prefactor: false,
                    centers: vec![self.center()],
                    weights: vec![sign * self.sigma as f64],
                }
            }
            Variant::Thm2 => {
                if !m.is_multiple_of(2) {
                    return bad(format!("thm2 needs even M, got {m}"));
                }
                let w = self.center();
                let shifts = shift_set(m, self.delta / 2.0);
                let mut centers = vec![w.clone()];
                let mut weights = vec![1.0];
                let share = -1.0 / binomial(self.m, self.m / 2);
                for v in shifts {
                    centers.push(w.iter().zip(&v).map(|(a, b)| a + b).collect());
                    weights.push(share);
                }
                BumpMixture {
                    m,
                    xi: self.delta.powi(3),
                    product_prefactor: true,
                    centers,
                    weights,
                }
            }
            Variant::Custom => {
                let Some(c) = &self.custom else {
                    return bad("custom variant needs a bump list".into());
                };
                if !(c.radius > 0.0) {
                    return bad(format!("bump radius must be positive, got {}", c.radius));
                }
                for b in &c.bumps {
                    if b.center.len() != m {
                        return bad(format!("center {:?} is not in R^{m}", b.center));
                    }
                    let s: f64 = b.center.iter().sum();
                    if (s - 1.0).abs() > 1e-12 {
                        return bad(format!("center {:?} does not sum to 1", b.center));
                    }
                }
                let mix = BumpMixture {
                    m,
                    xi: c.radius,
                    product_prefactor: c.product_prefactor,
                    centers: c.bumps.iter().map(|b| b.center.clone()).collect(),
                    weights: c.bumps.iter().map(|b| b.weight).collect(),
                };
                check_symmetric(&mix)?;
                mix
            }
        };
        if !mix.centers.is_empty() && mix.support_min_coordinate() <= self.epsilon() {
            return bad(format!(
                "support reaches min u_i = {:.6} <= 1/(2M) = {:.6}",
                mix.support_min_coordinate(),
                self.epsilon()
            ));
        }
        if self.variant != Variant::Custom {
            let lim = 1.0 / (3.0 * (self.m as f64).powi(2));
            if self.delta > lim * (1.0 + 1e-12) {
                return bad(format!("delta = {} exceeds 1/(3M^2) = {lim}", self.delta));
            }
        }
        Ok(mix)
    }

    /// `f_{1_M}(u)`, for `u` on the simplex.
    pub fn f_one_m(&self, u: &[f64]) -> Result<f64, QuadError> {
        let mix = self.validate()?;
        f_one_m(&mix, u)
    }
}

/// `f_{1_M}(u)` for a validated mixture; `u` must sum to 1.
pub fn f_one_m(mix: &BumpMixture, u: &[f64]) -> Result<f64, QuadError> {
    if u.len() != mix.m {
        return Err(QuadError::InvalidSpec(format!("expected {} coordinates", mix.m)));
    }
    let s: f64 = u.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(QuadError::SumNotOne { sum: s });
    }
    Ok(mix.eval(u))
}

/// The bump set must be closed under each transposition of coordinates.
fn check_symmetric(mix: &BumpMixture) -> Result<(), QuadError> {
    let tol = 1e-12;
    for i in 0..mix.m {
        for j in i + 1..mix.m {
            for (c, &w) in mix.centers.iter().zip(&mix.weights) {
                let mut t = c.clone();
                t.swap(i, j);
                let mate: f64 = mix
                    .centers
                    .iter()
                    .zip(&mix.weights)
                    .filter(|(d, _)| d.iter().zip(&t).all(|(a, b)| (a - b).abs() < tol))
                    .map(|(_, &v)| v)
                    .sum();
                let own: f64 = mix
                    .centers
                    .iter()
                    .zip(&mix.weights)
                    .filter(|(d, _)| d.iter().zip(c).all(|(a, b)| (a - b).abs() < tol))
                    .map(|(_, &v)| v)
                    .sum();
                if (mate - own).abs() > tol * (1.0 + w.abs()) {
                    return Err(QuadError::InvalidSpec(format!(
                        "custom bumps are not symmetric under swapping coordinates {i} and {j}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Largest finite-difference gradient norm of `f_{1_M}` seen along random
/// tangent directions through the support. Used for reporting only.
pub fn observed_gradient_sup(mix: &BumpMixture, samples: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = mix.m;
    let h = mix.xi * 1e-4;
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        if mix.centers.is_empty() {
            break;
        }
        let c = &mix.centers[rng.gen_range(0..mix.centers.len())];
        let mut dir: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = dir.iter().sum::<f64>() / m as f64;
        dir.iter_mut().for_each(|x| *x -= mean);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        dir.iter_mut().for_each(|x| *x /= norm);
        let r = rng.gen_range(0.0..mix.xi);
        let p: Vec<f64> = c.iter().zip(&dir).map(|(a, b)| a + r * b).collect();
        let fwd: Vec<f64> = p.iter().zip(&dir).map(|(a, b)| a + h * b).collect();
        let bwd: Vec<f64> = p.iter().zip(&dir).map(|(a, b)| a - h * b).collect();
        let g = (mix.eval(&fwd) - mix.eval(&bwd)).abs() / (2.0 * h);
        best = best.max(g);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_examples() {
        let xi = 0.3;
        assert_eq!(bump(&[0.0, 0.0], xi).unwrap(), 1.0);
        assert_eq!(bump(&[xi, 0.0], xi).unwrap(), 0.0);
        let h = xi / 2f64.sqrt();
        assert!((bump(&[h, 0.0], xi).unwrap() - 0.25).abs() < 1e-15);
        assert!(bump(&[0.0], 0.0).is_err());
    }

    #[test]
    fn thm1_center_and_support() {
        for (m, sigma) in [(3u32, 1i8), (3, -1), (4, 1)] {
            let spec = TestFunctionSpec::thm1(m, 1.0 / (3.0 * (m * m) as f64), sigma);
            let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(spec.f_one_m(&spec.center()).unwrap(), sign * sigma as f64);
            let eps = spec.epsilon();
            let mut u = vec![(1.0 - eps) / (m - 1) as f64; m as usize];
            u[0] = eps;
            assert_eq!(spec.f_one_m(&u).unwrap(), 0.0);
        }
    }

    #[test]
    fn thm2_center_value() {
        let spec = TestFunctionSpec::thm2(4, 1.0 / 4096.0);
        let v = spec.f_one_m(&spec.center()).unwrap();
        assert!((v - 4f64.powi(-4)).abs() < 1e-18);
        assert_eq!(spec.validate().unwrap().centers.len(), 7);
        assert!(TestFunctionSpec::thm2(3, 0.01).validate().is_err());
    }

    #[test]
    fn sum_must_be_one() {
        let spec = TestFunctionSpec::thm1(3, 1.0 / 27.0, 1);
        assert!(matches!(
            spec.f_one_m(&[0.3, 0.3, 0.3]),
            Err(QuadError::SumNotOne { .. })
        ));
    }

    #[test]
    fn delta_limit() {
        assert!(TestFunctionSpec::thm1(3, 0.05, 1).validate().is_err());
        assert!(TestFunctionSpec::thm1(3, 1.0 / 27.0, 1).validate().is_ok());
    }

    #[test]
    fn asymmetric_custom_is_rejected() {
        let mut spec = TestFunctionSpec::zero(3, 0.02);
        spec.custom.as_mut().unwrap().bumps.push(CustomBump {
            center: vec![0.3, 0.33, 0.37],
            weight: 1.0,
        });
        assert!(spec.validate().is_err());
        assert!(TestFunctionSpec::zero(3, 0.02).validate().unwrap().is_zero());
    }

    #[test]
    fn shift_set_size() {
        assert_eq!(shift_set(4, 0.1).len(), 6);
        assert_eq!(shift_set(6, 0.1).len(), 20);
        assert!(shift_set(4, 0.1).iter().all(|v| v.iter().sum::<f64>().abs() < 1e-15));
    }
}
