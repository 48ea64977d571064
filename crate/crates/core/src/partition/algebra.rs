use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{enumerate_partitions, perm_count, Partition, PartitionError};

fn rat(n: i64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: usize) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}

/// `e_α = (−1)^{Σ(α)+|α|} / (α_1⋯α_r)`. Gives `e_E = 1` and `e_{1_M} = 1`.
pub fn e_coefficient(alpha: &Partition) -> BigRational {
    let sign = if (alpha.sum() as usize + alpha.len()).is_multiple_of(2) { 1 } else { -1 };
    rat(sign, alpha.product())
}

/// Float value of `e_α`, for the numerical modules.
pub fn e_coefficient_f64(alpha: &Partition) -> f64 {
    let sign = if (alpha.sum() as usize + alpha.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / alpha.product() as f64
}

/// Exact coefficients for one value of `M`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub m: u32,
    pub e: BTreeMap<Partition, BigRational>,
    pub perm: BTreeMap<Partition, u64>,
    /// `E ∪ P(1) ∪ ⋯ ∪ P(M−2)`.
    pub q: Vec<Partition>,
}

impl CoefficientTable {
    pub fn new(m: u32) -> Result<Self, PartitionError> {
        if m < 2 {
            return Err(PartitionError::MOutOfRange { m, lo: 2, hi: u32::MAX });
        }
        let mut e = BTreeMap::new();
        let mut perm = BTreeMap::new();
        for s in 0..=m {
            for a in enumerate_partitions(s) {
                if !a.is_empty() {
                    perm.insert(a.clone(), perm_count(&a)?);
                }
                e.insert(a.clone(), e_coefficient(&a));
            }
        }
        Ok(Self {
            m,
            e,
            perm,
            q: q_set(m),
        })
    }

    pub fn e(&self, alpha: &Partition) -> &BigRational {
        &self.e[alpha]
    }

    pub fn e_f64(&self, alpha: &Partition) -> f64 {
        e_coefficient_f64(alpha)
    }
}

/// `Q = E ∪ P(1) ∪ ⋯ ∪ P(M−2)`.
pub fn q_set(m: u32) -> Vec<Partition> {
    (0..=m.saturating_sub(2)).flat_map(enumerate_partitions).collect()
}

/// Residual of one equation of the coefficient system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemResidual {
    pub beta: Partition,
    pub residual: BigRational,
}

/// `Σ_{μ ∈ P(M−Σβ)} perm(μ)/|μ|! · e_{β+μ}` for every `β ∈ Q`.
pub fn verify_coefficient_system(m: u32) -> Result<Vec<SystemResidual>, PartitionError> {
    if !(2..=12).contains(&m) {
        return Err(PartitionError::MOutOfRange { m, lo: 2, hi: 12 });
    }
    let table = CoefficientTable::new(m)?;
    let mut out = Vec::with_capacity(table.q.len());
    for beta in &table.q {
        let mut acc = BigRational::zero();
        for mu in enumerate_partitions(m - beta.sum()) {
            let w = BigRational::new(BigInt::from(table.perm[&mu]), factorial(mu.len()));
            acc += w * table.e(&beta.plus(&mu));
        }
        out.push(SystemResidual {
            beta: beta.clone(),
            residual: acc,
        });
    }
    Ok(out)
}

/// Calls `visit(r, d_1⋯d_r, parts)` for every ordered composition of `m`.
fn for_each_composition(m: u32, visit: &mut impl FnMut(usize, u64, &[u32])) {
    fn rec(rest: u32, prod: u64, cur: &mut Vec<u32>, visit: &mut impl FnMut(usize, u64, &[u32])) {
        if rest == 0 {
            visit(cur.len(), prod, cur);
            return;
        }
        for d in 1..=rest {
            cur.push(d);
            rec(rest - d, prod * d as u64, cur, visit);
            cur.pop();
        }
    }
    rec(m, 1, &mut Vec::new(), visit);
}

/// `γ_m = Σ_r (−1)^r/r! Σ_{d_1+⋯+d_r=m} 1/(d_1⋯d_r)`, summed over
/// compositions. Terms with equal `(r, ∏d)` are merged before the rational
/// arithmetic.
pub fn gamma_m(m: u32) -> Result<BigRational, PartitionError> {
    if !(1..=20).contains(&m) {
        return Err(PartitionError::MOutOfRange { m, lo: 1, hi: 20 });
    }
    let mut groups: HashMap<(usize, u64), u64> = HashMap::new();
    for_each_composition(m, &mut |r, prod, _| *groups.entry((r, prod)).or_insert(0) += 1);
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_unstable();
    let mut acc = BigRational::zero();
    for ((r, prod), count) in keys {
        let sign = if r % 2 == 0 { 1 } else { -1 };
        acc += BigRational::new(
            BigInt::from(sign) * BigInt::from(count),
            factorial(r) * BigInt::from(prod),
        );
    }
    Ok(acc)
}

/// `γ_m` through partitions: `Σ_{μ∈P(m)} (−1)^{|μ|}/|μ|! · perm(μ)/∏μ`.
pub fn gamma_m_by_partitions(m: u32) -> BigRational {
    let mut acc = BigRational::zero();
    for mu in enumerate_partitions(m) {
        let sign = if mu.len() % 2 == 0 { 1 } else { -1 };
        acc += BigRational::new(
            BigInt::from(sign) * BigInt::from(perm_count(&mu).unwrap()),
            factorial(mu.len()) * BigInt::from(mu.product()),
        );
    }
    acc
}

/// Signed count `Σ_{ε ∈ {0,1}^r, Σε_j d_j = N} (−1)^{Σε}` for each `N = 0..=total`.
fn epsilon_counts(parts: &[u32], total: u32) -> Vec<i64> {
    let mut counts = vec![0i64; total as usize + 1];
    counts[0] = 1;
    for &d in parts {
        let d = d as usize;
        for n in (d..counts.len()).rev() {
            counts[n] -= counts[n - d];
        }
    }
    counts
}

fn check_w_args(m: u32, n: u32) -> Result<(), PartitionError> {
    if !(1..=12).contains(&m) {
        return Err(PartitionError::MOutOfRange { m, lo: 1, hi: 12 });
    }
    if n > m {
        return Err(PartitionError::NOutOfRange { n, m });
    }
    Ok(())
}

/// `W(M, N)` by direct enumeration of compositions of `M` and sign vectors.
pub fn w_coefficient(m: u32, n: u32) -> Result<BigRational, PartitionError> {
    check_w_args(m, n)?;
    let mut groups: HashMap<(usize, u64), i64> = HashMap::new();
    for_each_composition(m, &mut |r, prod, parts| {
        // enumerate sign vectors explicitly
        let mut signed = 0i64;
        for mask in 0u32..(1 << r) {
            let s: u32 = (0..r).filter(|j| mask & (1 << j) != 0).map(|j| parts[j]).sum();
            if s == n {
                signed += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        *groups.entry((r, prod)).or_insert(0) += signed;
    });
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_unstable();
    let mut acc = BigRational::zero();
    for ((r, prod), signed) in keys {
        acc += BigRational::new(BigInt::from(signed), factorial(r) * BigInt::from(prod));
    }
    Ok(acc)
}

/// `W(M, N)` through partitions of `M` weighted by `perm(α)`.
pub fn w_coefficient_by_partitions(m: u32, n: u32) -> Result<BigRational, PartitionError> {
    check_w_args(m, n)?;
    let mut acc = BigRational::zero();
    for alpha in enumerate_partitions(m) {
        let signed = epsilon_counts(alpha.parts(), m)[n as usize];
        acc += BigRational::new(
            BigInt::from(signed) * BigInt::from(perm_count(&alpha)?),
            factorial(alpha.len()) * BigInt::from(alpha.product()),
        );
    }
    Ok(acc)
}

/// One line of an identity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub params: String,
    /// `value − expected` as an exact rational string.
    pub residual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub max_m: u32,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("identity,params,residual,pass\n");
        for c in &self.checks {
            s.push_str(&format!("{},\"{}\",{},{}\n", c.identity, c.params, c.residual, c.pass));
        }
        s
    }
}

fn push_check(out: &mut Vec<IdentityCheck>, identity: &str, params: String, residual: BigRational) {
    out.push(IdentityCheck {
        identity: identity.to_string(),
        params,
        pass: residual.is_zero(),
        residual: residual.to_string(),
    });
}

/// Runs every exact identity for moduli up to `max_m`: the coefficient
/// system, `γ_m` (through `m = 20`), `W(M, N)`, the two routes to `γ_m` and
/// `W`, multiplicativity of `e` for total size up to `max_m`, the bound
/// `|γ_m| ≤ 2^{m−1}` and `Σ_{μ∈P(m)} perm(μ) = 2^{m−1}`.
pub fn identity_report(max_m: u32) -> Result<IdentityReport, PartitionError> {
    if !(2..=12).contains(&max_m) {
        return Err(PartitionError::MOutOfRange { m: max_m, lo: 2, hi: 12 });
    }
    let mut checks = Vec::new();
    for m in 1..=20u32 {
        let g = gamma_m(m)?;
        let expected = if m == 1 { -BigRational::one() } else { BigRational::zero() };
        push_check(&mut checks, "gamma", format!("m={m}"), &g - &expected);
        if m <= 16 {
            push_check(
                &mut checks,
                "gamma_partition_route",
                format!("m={m}"),
                gamma_m_by_partitions(m) - &g,
            );
        }
        let bound = BigRational::from_integer(BigInt::from(1u64 << (m - 1)));
        let excess = if g.abs() <= bound { BigRational::zero() } else { g.abs() - bound };
        push_check(&mut checks, "gamma_bound", format!("m={m}"), excess);
        let perms: u64 = enumerate_partitions(m).iter().map(|mu| perm_count(mu).unwrap()).sum();
        push_check(
            &mut checks,
            "perm_sum_compositions",
            format!("m={m}"),
            BigRational::from_integer(BigInt::from(perms as i64 - (1i64 << (m - 1)))),
        );
    }
    for m in 1..=max_m {
        for n in 0..=m {
            let w = w_coefficient(m, n)?;
            let expected = match n {
                0 => BigRational::one(),
                1 => -BigRational::one(),
                _ => BigRational::zero(),
            };
            push_check(&mut checks, "w", format!("M={m},N={n}"), &w - expected);
            push_check(
                &mut checks,
                "w_partition_route",
                format!("M={m},N={n}"),
                w_coefficient_by_partitions(m, n)? - w,
            );
        }
    }
    for m in 2..=max_m {
        for r in verify_coefficient_system(m)? {
            push_check(&mut checks, "system", format!("M={m},beta={}", r.beta), r.residual);
        }
    }
    let all: Vec<Partition> = (0..=max_m).flat_map(enumerate_partitions).collect();
    for b in &all {
        for mu in &all {
            if b.sum() + mu.sum() <= max_m && b <= mu {
                let lhs = e_coefficient(&b.plus(mu));
                let rhs = e_coefficient(b) * e_coefficient(mu);
                push_check(&mut checks, "e_multiplicative", format!("beta={b},mu={mu}"), lhs - rhs);
            }
        }
    }
    Ok(IdentityReport { max_m, checks })
}
