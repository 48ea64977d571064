//! Midpoint tensor-grid quadrature on simplex slices. Slow, but shares no
//! code with the bump-local rules, so it serves as their oracle at moderate
//! bump radius.

use crate::numeric::NeumaierSum;

use super::testfn::BumpMixture;

/// `∫ f_{1_M}(w) h(w)/∏w` over `{block sums = values}` in the measure
/// `∏_j dw_{1j}⋯dw_{a_j−1,j}`, with `n` midpoint cells per free coordinate
/// spanning `[min center − ξ, max center + ξ]`.
pub fn grid_slice_integral(
    mix: &BumpMixture,
    sizes: &[usize],
    values: &[f64],
    n: usize,
    h: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let lo = mix.centers.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b)) - mix.xi;
    let hi = mix.centers.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + mix.xi;
    let step = (hi - lo) / n as f64;
    let free: usize = sizes.iter().map(|a| a - 1).sum();
    let total = n.pow(free as u32);
    let mut acc = NeumaierSum::new();
    let mut w = vec![0.0; mix.m];
    for idx in 0..total {
        let mut rest = idx;
        let mut off = 0;
        for (&a, &v) in sizes.iter().zip(values) {
            let mut s = 0.0;
            for i in 0..a - 1 {
                let x = lo + (rest % n) as f64 * step + 0.5 * step;
                rest /= n;
                w[off + i] = x;
                s += x;
            }
            w[off + a - 1] = v - s;
            off += a;
        }
        if w.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let f = mix.eval(&w);
        if f != 0.0 {
            acc.add(f * h(&w) / w.iter().product::<f64>());
        }
    }
    acc.value() * step.powi(free as i32)
}
