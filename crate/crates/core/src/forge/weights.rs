use std::collections::HashMap;
use std::sync::RwLock;

use super::ForgeError;
use crate::partition::Partition;
use crate::quadrature::{QuadratureConfig, TestFunction};

/// Grid step of the `f_α` memo in each free coordinate.
pub const MEMO_STEP: f64 = 1e-3;

/// Memoized `f_α` values on a grid of the first `r − 1` normalized log
/// coordinates, read back by multilinear interpolation.
///
/// Readers and writers may race on a key; values are deterministic so the
/// last write is as good as the first.
#[derive(Debug, Default)]
pub struct MemoGrid {
    step: f64,
    cache: RwLock<HashMap<(Partition, Vec<i64>), f64>>,
}

impl MemoGrid {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// A memo when interpolation is sound for this test function: the step
    /// must resolve the bump radius.
    pub fn for_function(tf: &TestFunction, exact: bool) -> Option<Self> {
        (!exact && MEMO_STEP <= tf.spec.xi() / 4.0).then(|| Self::new(MEMO_STEP))
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn node(
        &self,
        tf: &TestFunction,
        alpha: &Partition,
        key: Vec<i64>,
        quad: &QuadratureConfig,
    ) -> Result<f64, ForgeError> {
        let k = (alpha.clone(), key);
        if let Some(&v) = self.cache.read().unwrap().get(&k) {
            return Ok(v);
        }
        let mut v: Vec<f64> = k.1.iter().map(|&g| g as f64 * self.step).collect();
        v.push(1.0 - v.iter().sum::<f64>());
        let val = tf.f_alpha(&v, alpha, quad)?;
        self.cache.write().unwrap().insert(k, val);
        Ok(val)
    }

    fn interpolate(
        &self,
        tf: &TestFunction,
        alpha: &Partition,
        v: &[f64],
        quad: &QuadratureConfig,
    ) -> Result<f64, ForgeError> {
        let free = &v[..v.len() - 1];
        let base: Vec<i64> = free.iter().map(|&c| (c / self.step).floor() as i64).collect();
        let frac: Vec<f64> = free
            .iter()
            .zip(&base)
            .map(|(&c, &g)| c / self.step - g as f64)
            .collect();
        let mut acc = 0.0;
        for corner in 0u32..(1 << free.len()) {
            let mut w = 1.0;
            let mut key = base.clone();
            for (j, k) in key.iter_mut().enumerate() {
                if corner & (1 << j) != 0 {
                    *k += 1;
                    w *= frac[j];
                } else {
                    w *= 1.0 - frac[j];
                }
            }
            if w != 0.0 {
                acc += w * self.node(tf, alpha, key, quad)?;
            }
        }
        Ok(acc)
    }
}

/// Normalized log vector `(log p_i / log n)` of a factor list.
pub fn log_vector(factors: &[u64]) -> Vec<f64> {
    let logs: Vec<f64> = factors.iter().map(|&p| (p as f64).ln()).collect();
    let total: f64 = logs.iter().sum();
    logs.iter().map(|l| l / total).collect()
}

/// `b_n = f_α(log p_1 / log n, …, log p_r / log n)` with `factors` sorted
/// ascending, which lines them up with the sorted parts of `α`.
pub fn evaluate_b(
    factors: &[u64],
    alpha: &Partition,
    tf: &TestFunction,
    quad: &QuadratureConfig,
    memo: Option<&MemoGrid>,
) -> Result<f64, ForgeError> {
    let v = log_vector(factors);
    let b = if alpha.len() == 1 {
        // v = (1) exactly; cache it whatever the mode
        let memo_single = memo.map(|m| m.node(tf, alpha, Vec::new(), quad));
        match memo_single {
            Some(r) => r?,
            None => tf.f_alpha(&[1.0], alpha, quad)?,
        }
    } else if alpha.len() == tf.m() {
        tf.f_one_m(&v)?
    } else if let Some(m) = memo {
        m.interpolate(tf, alpha, &v, quad)?
    } else {
        tf.f_alpha(&v, alpha, quad)?
    };
    if !(b.abs() <= 1.0) {
        return Err(ForgeError::Invariant(format!("|b_n| = {b} > 1 for factors {factors:?}")));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::TestFunctionSpec;

    #[test]
    fn center_value_of_top_function() {
        let tf = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, -1)).unwrap();
        let quad = QuadratureConfig::default();
        let alpha = Partition::ones(3);
        // three primes near x^{1/3} with x around 1e8
        let b = evaluate_b(&[463, 467, 479], &alpha, &tf, &quad, None).unwrap();
        assert!(b < -0.9, "b = {b}");
    }

    #[test]
    fn memo_tracks_exact_values() {
        let tf = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, 1)).unwrap();
        let quad = QuadratureConfig::default();
        let memo = MemoGrid::for_function(&tf, false).unwrap();
        let alpha = Partition::new(vec![1, 2]).unwrap();
        let mut worst: f64 = 0.0;
        for p in [461u64, 499, 523, 547, 571, 601] {
            let q = 100_003_000 / p;
            let exact = evaluate_b(&[p, q], &alpha, &tf, &quad, None).unwrap();
            let interp = evaluate_b(&[p, q], &alpha, &tf, &quad, Some(&memo)).unwrap();
            worst = worst.max((exact - interp).abs());
        }
        assert!(worst < 1e-4, "worst = {worst}");
        assert!(MemoGrid::for_function(&TestFunction::new(TestFunctionSpec::thm2(4, 1.0 / 4096.0)).unwrap(), false).is_none());
    }
}
