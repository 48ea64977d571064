//! Deterministic floating-point accumulation.
//!
//! Every floating sum that ends up in a report goes through [`NeumaierSum`],
//! either directly in index order or through [`chunked_sum`], whose chunk
//! boundaries depend only on the input length. Results are therefore
//! bit-identical across runs and across thread counts.

use rayon::prelude::*;

/// Chunk length used by the parallel reductions. Fixed so that the merge
/// tree never depends on the size of the thread pool.
pub const REDUCTION_CHUNK: usize = 1 << 14;

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one.
    #[inline]
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of `f(i)` for `i in 0..len`, evaluated in parallel over
/// fixed-size chunks and merged left to right.
pub fn chunked_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<NeumaierSum> = (0..len.div_ceil(REDUCTION_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(len);
            (lo..hi).map(&f).collect()
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// Like [`chunked_sum`] but accumulates several sums at once; `f` writes the
/// `width` contributions of index `i` into the provided buffer.
pub fn chunked_sums<F>(len: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<NeumaierSum>> = (0..len.div_ceil(REDUCTION_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(len);
            let mut acc = vec![NeumaierSum::new(); width];
            let mut buf = vec![0.0; width];
            for i in lo..hi {
                buf.iter_mut().for_each(|b| *b = 0.0);
                f(i, &mut buf);
                for (a, &b) in acc.iter_mut().zip(&buf) {
                    a.add(b);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![NeumaierSum::new(); width];
    for p in &partials {
        for (t, s) in total.iter_mut().zip(p) {
            t.merge(s);
        }
    }
    total.iter().map(NeumaierSum::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_lost_bits() {
        let mut acc = NeumaierSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn chunked_sum_is_thread_count_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let n = 3 * REDUCTION_CHUNK + 17;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| chunked_sum(n, f));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| chunked_sum(n, f));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn chunked_sums_matches_individual_sums() {
        let n = REDUCTION_CHUNK + 5;
        let v = chunked_sums(n, 2, |i, out| {
            out[0] = i as f64;
            out[1] = 1.0;
        });
        assert_eq!(v[0], (n * (n - 1) / 2) as f64);
        assert_eq!(v[1], n as f64);
    }
}
