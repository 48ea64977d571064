use serde::{Deserialize, Serialize};

use super::{HarnessError, SlabContext};
use crate::arith::{lambda_k_of, liouville_of, mobius_of};
use crate::numeric::chunked_sums;
use crate::quadrature::MomentSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    /// `S_k = Σ a_n Λ_k(n)` over the window.
    pub s_k: f64,
    /// `S_k / (k y log^{k−1} x)`.
    pub t_k: f64,
    /// `S_k / (y log^{k−1} x) − k`.
    pub raw_bias: f64,
    /// `Σ b_n Λ_k(n) / (y log^{k−1} x)`, the part of the raw bias carried by
    /// the weights.
    pub excess_bias: f64,
    /// The excess bias restricted to squarefree `n`.
    pub excess_bias_squarefree: f64,
    /// `(−1)^{M+1} Z_k`.
    pub predicted: Option<f64>,
    /// `excess_bias / predicted`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub lo: u64,
    pub hi: u64,
    pub x_ref: u64,
    pub log_x: f64,
    pub rows: Vec<MomentRow>,
    /// `Σ a_n μ(n)`.
    pub mu_sum: f64,
    /// `Σ a_n λ(n)`.
    pub lambda_sum: f64,
    /// `|Σ a_n μ(n)| · log x / y`.
    pub parity_normalized: f64,
    /// `(−1)^M Z_0 · y / log x`.
    pub predicted_mu_sum: Option<f64>,
    /// `Σ a_n (λ(n) − μ(n))` over the whole window and over the
    /// non-squarefree `n` only; the two agree since `λ = μ` on squarefree `n`.
    pub lambda_mu_gap: f64,
    pub lambda_mu_gap_square_divisible: f64,
    /// Weighted entries whose `n` is divisible by the square of a prime.
    pub square_divisible_entries: usize,
    /// `x^{1 − 1/M + δ}` for construction slabs.
    pub square_divisible_scale: Option<f64>,
}

impl MomentReport {
    pub fn row(&self, k: u32) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,s_k,t_k,raw_bias,excess_bias,excess_bias_squarefree,predicted,ratio\n");
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{},{}\n",
                r.k,
                r.s_k,
                r.t_k,
                r.raw_bias,
                r.excess_bias,
                r.excess_bias_squarefree,
                opt(r.predicted),
                opt(r.ratio)
            ));
        }
        s
    }
}

/// Weighted `Λ_k` sums, parity sums and their predictions.
pub fn moment_scan(
    ctx: &SlabContext,
    k_max: u32,
    moments: Option<&MomentSet>,
) -> Result<MomentReport, HarnessError> {
    if k_max == 0 {
        return Err(HarnessError::BadParameter("k_max must be positive".into()));
    }
    let header = &ctx.slab.header;
    let mut m_parity = None;
    if let Some(ms) = moments {
        let spec = header
            .spec
            .as_ref()
            .ok_or_else(|| HarnessError::Mismatch("slab carries no test function".into()))?;
        if spec.m != ms.m || spec.delta != ms.delta || spec.variant != ms.variant || spec.sigma != ms.sigma {
            return Err(HarnessError::Mismatch(format!(
                "slab test function {} differs from the moment set",
                header.spec_hash
            )));
        }
        if ms.z.len() <= k_max as usize {
            return Err(HarnessError::Mismatch(format!(
                "moment set has Z_0..Z_{}, need Z_{k_max}",
                ms.z.len() - 1
            )));
        }
        m_parity = Some(if ms.m % 2 == 0 { 1.0 } else { -1.0 });
    }

    let k = k_max as usize;
    // layout: S_1..S_k, excess_1..excess_k, μ, λ, gap, square-divisible
    // gap, squarefree excess_1..excess_k
    let width = 3 * k + 4;
    let lo = ctx.lo();
    let sums = chunked_sums(ctx.b.len(), width, |i, out| {
        let pp = ctx.factors.get(lo + 1 + i as u64);
        let b = ctx.b[i];
        let a = 1.0 + b;
        for j in 0..k {
            let l = lambda_k_of(pp, j as u32 + 1);
            out[j] = a * l;
            out[k + j] = b * l;
        }
        let squarefree = pp.iter().all(|&(_, e)| e == 1);
        if squarefree {
            for j in 0..k {
                out[2 * k + 4 + j] = out[k + j];
            }
        }
        let mu = mobius_of(pp) as f64;
        let la = liouville_of(pp) as f64;
        out[2 * k] = a * mu;
        out[2 * k + 1] = a * la;
        out[2 * k + 2] = a * (la - mu);
        if !squarefree {
            out[2 * k + 3] = a * (la - mu);
        }
    });

    let y = ctx.y();
    let log_x = ctx.log_x();
    let rows = (0..k)
        .map(|j| {
            let kk = j as u32 + 1;
            let scale = y * log_x.powi(j as i32);
            let excess_bias = sums[k + j] / scale;
            let predicted = moments.zip(m_parity).map(|(ms, sgn)| -sgn * ms.z[kk as usize]);
            MomentRow {
                k: kk,
                s_k: sums[j],
                t_k: sums[j] / (kk as f64 * scale),
                raw_bias: sums[j] / scale - kk as f64,
                excess_bias,
                excess_bias_squarefree: sums[2 * k + 4 + j] / scale,
                predicted,
                ratio: predicted.map(|p| excess_bias / p),
            }
        })
        .collect();

    let square_divisible_entries = ctx
        .slab
        .entries
        .iter()
        .filter(|e| e.factors.windows(2).any(|w| w[0] == w[1]))
        .count();
    let square_divisible_scale = header.window.as_ref().map(|w| {
        (w.x as f64).powf(1.0 - 1.0 / w.m as f64 + w.delta)
    });
    Ok(MomentReport {
        lo,
        hi: ctx.hi(),
        x_ref: ctx.x_ref(),
        log_x,
        rows,
        mu_sum: sums[2 * k],
        lambda_sum: sums[2 * k + 1],
        parity_normalized: sums[2 * k].abs() * log_x / y,
        predicted_mu_sum: moments
            .zip(m_parity)
            .map(|(ms, sgn)| sgn * ms.z[0] * y / log_x),
        lambda_mu_gap: sums[2 * k + 2],
        lambda_mu_gap_square_divisible: sums[2 * k + 3],
        square_divisible_entries,
        square_divisible_scale,
    })
}
