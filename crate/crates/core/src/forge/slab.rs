//! Materialized windows of the weighted sequence.
//!
//! Binary layout, little-endian: the 8 magic bytes `PSLAB001`, a u64 header
//! length and that many bytes of JSON header, a u64 record count, then per
//! record `n` (u64), the α index (u8, `0xFF` when none), the factor count
//! (u8), the factors (u64 each) and `b_n` (f64).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::classes::{build_prime_classes, enumerate_class, sieve_class_tables};
use super::weights::{evaluate_b, MemoGrid};
use super::{ForgeError, WindowConfig};
use crate::arith::{factor_range, liouville_of, sieve_primes};
use crate::partition::{enumerate_partitions, Partition};
use crate::quadrature::{QuadratureConfig, TestFunction, TestFunctionSpec, Variant};

pub const SLAB_MAGIC: &[u8; 8] = b"PSLAB001";
const NO_CLASS: u8 = 0xFF;

/// Hex SHA-256 of the JSON rendering of `value`.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlabKind {
    Construction,
    Selberg,
    Unbiased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabHeader {
    pub kind: SlabKind,
    /// The window is `(lo, hi]`.
    pub lo: u64,
    pub hi: u64,
    #[serde(default)]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub spec: Option<TestFunctionSpec>,
    pub spec_hash: String,
    #[serde(default)]
    pub quad: Option<QuadratureConfig>,
    pub exact: bool,
    /// α index table for the records.
    pub partitions: Vec<Partition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabEntry {
    pub n: u64,
    /// Index into [`SlabHeader::partitions`].
    pub alpha: Option<u8>,
    /// Prime factors with multiplicity, ascending.
    pub factors: Vec<u64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSlab {
    pub header: SlabHeader,
    /// Sorted by `n`, one per `n`.
    pub entries: Vec<SlabEntry>,
}

/// Per-α counts and `Σ|b_n|`, used for determinism checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabStats {
    pub alpha: String,
    pub count: usize,
    pub abs_b_sum: f64,
    pub b_sum: f64,
}

impl WeightedSlab {
    /// Number of integers in the window.
    pub fn k(&self) -> u64 {
        self.header.hi - self.header.lo
    }

    pub fn alpha_of(&self, e: &SlabEntry) -> Option<&Partition> {
        e.alpha.map(|i| &self.header.partitions[i as usize])
    }

    /// `b_n` for `n = lo + 1 + i`.
    pub fn dense_b(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.k() as usize];
        for e in &self.entries {
            b[(e.n - self.header.lo - 1) as usize] = e.b;
        }
        b
    }

    pub fn stats(&self) -> Vec<SlabStats> {
        let mut out: Vec<SlabStats> = self
            .header
            .partitions
            .iter()
            .map(|p| SlabStats {
                alpha: p.to_string(),
                count: 0,
                abs_b_sum: 0.0,
                b_sum: 0.0,
            })
            .collect();
        for e in &self.entries {
            if let Some(i) = e.alpha {
                let s = &mut out[i as usize];
                s.count += 1;
                s.abs_b_sum += e.b.abs();
                s.b_sum += e.b;
            }
        }
        out
    }

    /// The unbiased sequence `a_n ≡ 1` on `(lo, hi]`.
    pub fn unbiased(lo: u64, hi: u64) -> Self {
        Self {
            header: SlabHeader {
                kind: SlabKind::Unbiased,
                lo,
                hi,
                window: None,
                spec: None,
                spec_hash: content_hash(&()),
                quad: None,
                exact: true,
                partitions: Vec::new(),
            },
            entries: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), ForgeError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(SLAB_MAGIC)?;
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for e in &self.entries {
            w.write_all(&e.n.to_le_bytes())?;
            w.write_all(&[e.alpha.unwrap_or(NO_CLASS), e.factors.len() as u8])?;
            for p in &e.factors {
                w.write_all(&p.to_le_bytes())?;
            }
            w.write_all(&e.b.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, ForgeError> {
        let bad = |s: &str| ForgeError::BadSlabFile(s.to_string());
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != SLAB_MAGIC {
            return Err(bad("wrong magic"));
        }
        let hlen = read_u64(&mut r)? as usize;
        if hlen > 1 << 24 {
            return Err(bad("oversized header"));
        }
        let mut hbuf = vec![0u8; hlen];
        r.read_exact(&mut hbuf)?;
        let header: SlabHeader = serde_json::from_slice(&hbuf)?;
        let count = read_u64(&mut r)?;
        if header.lo > header.hi || count > header.hi - header.lo {
            return Err(bad("inconsistent header"));
        }
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let n = read_u64(&mut r)?;
            let mut ab = [0u8; 2];
            r.read_exact(&mut ab)?;
            let alpha = (ab[0] != NO_CLASS).then_some(ab[0]);
            if alpha.is_some_and(|a| a as usize >= header.partitions.len()) {
                return Err(bad("alpha index out of range"));
            }
            let factors = (0..ab[1]).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>, _>>()?;
            let b = f64::from_bits(read_u64(&mut r)?);
            entries.push(SlabEntry { n, alpha, factors, b });
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(bad("trailing bytes"));
        }
        if entries.windows(2).any(|w| w[0].n >= w[1].n)
            || entries.iter().any(|e| e.n <= header.lo || e.n > header.hi)
        {
            return Err(bad("records out of order or outside the window"));
        }
        Ok(Self { header, entries })
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ForgeError> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "n,alpha,factors,b")?;
        for e in &self.entries {
            let alpha = self.alpha_of(e).map(|p| p.to_string()).unwrap_or_default();
            let factors: Vec<String> = e.factors.iter().map(|p| p.to_string()).collect();
            writeln!(w, "{},\"{}\",{},{:e}", e.n, alpha, factors.join(" "), e.b)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64, ForgeError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Options for [`assemble_slab`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Evaluate every `f_α` directly instead of interpolating.
    pub exact: bool,
}

/// Builds the slab on the configured window `(x, x + y]`.
pub fn assemble_slab(
    cfg: &WindowConfig,
    tf: &TestFunction,
    quad: &QuadratureConfig,
    opts: &BuildOptions,
) -> Result<WeightedSlab, ForgeError> {
    assemble_slab_range(cfg, tf, quad, opts, cfg.x, cfg.x + cfg.y)
}

/// Builds the part `(lo, hi]` of the configured window. Classes keep the
/// configured `x` as their scale, so sub-windows agree entrywise with the
/// full build.
pub fn assemble_slab_range(
    cfg: &WindowConfig,
    tf: &TestFunction,
    quad: &QuadratureConfig,
    opts: &BuildOptions,
    lo: u64,
    hi: u64,
) -> Result<WeightedSlab, ForgeError> {
    let cw = cfg.validate()?;
    if lo < cfg.x || hi > cfg.x + cfg.y || lo >= hi {
        return Err(ForgeError::Schedule(format!(
            "sub-window ({lo}, {hi}] not inside ({}, {}]",
            cfg.x,
            cfg.x + cfg.y
        )));
    }
    let spec = &tf.spec;
    if spec.m != cfg.m || spec.delta != cfg.delta {
        return Err(ForgeError::Mismatch(format!(
            "test function has (M, delta) = ({}, {}), window has ({}, {})",
            spec.m, spec.delta, cfg.m, cfg.delta
        )));
    }
    if spec.variant == Variant::Thm1 && spec.sigma != cw.sigma {
        return Err(ForgeError::Mismatch(format!(
            "test function sigma {} differs from window sigma {}",
            spec.sigma, cw.sigma
        )));
    }
    let (small, window) = sieve_class_tables(&cw, lo, hi)?;
    let classes = build_prime_classes(&cw, lo, hi, &small, &window)?;
    let partitions = enumerate_partitions(cfg.m);
    let memo = MemoGrid::for_function(tf, opts.exact);

    let mut entries = Vec::new();
    for (ai, alpha) in partitions.iter().enumerate() {
        let members = enumerate_class(alpha, &classes);
        // f_(M) is only ever evaluated at v = (1)
        let single = match members.first() {
            Some(c) if alpha.len() == 1 && !tf.mix.is_zero() => {
                Some(evaluate_b(&c.factors, alpha, tf, quad, memo.as_ref())?)
            }
            _ => None,
        };
        let class_entries: Vec<SlabEntry> = members
            .into_par_iter()
            .map(|c| {
                let b = if tf.mix.is_zero() {
                    0.0
                } else if let Some(b) = single {
                    b
                } else {
                    evaluate_b(&c.factors, alpha, tf, quad, memo.as_ref())?
                };
                Ok(SlabEntry {
                    n: c.n,
                    alpha: Some(ai as u8),
                    factors: c.factors,
                    b,
                })
            })
            .collect::<Result<_, ForgeError>>()?;
        entries.extend(class_entries);
    }
    entries.sort_unstable_by_key(|e| e.n);
    if let Some(w) = entries.windows(2).find(|w| w[0].n == w[1].n) {
        return Err(ForgeError::Invariant(format!("{} lies in two classes", w[0].n)));
    }
    Ok(WeightedSlab {
        header: SlabHeader {
            kind: SlabKind::Construction,
            lo,
            hi,
            window: Some(cfg.clone()),
            spec: Some(spec.clone()),
            spec_hash: content_hash(spec),
            quad: Some(quad.clone()),
            exact: memo.is_none(),
            partitions,
        },
        entries,
    })
}

/// `a_n = 1 + λ(n)` on `(lo, hi]`.
pub fn selberg_sequence(lo: u64, hi: u64) -> Result<WeightedSlab, ForgeError> {
    if lo >= hi {
        return Err(ForgeError::Schedule(format!("empty window ({lo}, {hi}]")));
    }
    let aux = sieve_primes(2, hi.isqrt().max(2))?;
    let rf = factor_range(lo + 1, hi, &aux)?;
    let entries = (lo + 1..=hi)
        .into_par_iter()
        .map(|n| {
            let pp = rf.get(n);
            SlabEntry {
                n,
                alpha: None,
                factors: pp
                    .iter()
                    .flat_map(|&(p, e)| std::iter::repeat_n(p, e as usize))
                    .collect(),
                b: liouville_of(pp) as f64,
            }
        })
        .collect();
    Ok(WeightedSlab {
        header: SlabHeader {
            kind: SlabKind::Selberg,
            lo,
            hi,
            window: None,
            spec: None,
            spec_hash: content_hash(&"liouville"),
            quad: None,
            exact: true,
            partitions: Vec::new(),
        },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::WindowMode;

    fn cfg(x: u64, sigma: i8) -> WindowConfig {
        WindowConfig {
            x,
            y: x / 100,
            m: 3,
            delta: 1.0 / 27.0,
            varpi: 0.46,
            nu: 0.51,
            mode: WindowMode::DeskWindow,
            sigma,
            schedule: None,
        }
    }

    #[test]
    fn sigma_flips_every_weight() {
        let quad = QuadratureConfig::default();
        let opts = BuildOptions::default();
        let plus = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, 1)).unwrap();
        let minus = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, -1)).unwrap();
        let a = assemble_slab(&cfg(1_000_000, 1), &plus, &quad, &opts).unwrap();
        let b = assemble_slab(&cfg(1_000_000, -1), &minus, &quad, &opts).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (p, m) in a.entries.iter().zip(&b.entries) {
            assert_eq!(p.n, m.n);
            assert_eq!(p.b, -m.b);
        }
        assert!(a.entries.iter().all(|e| (0.0..=2.0).contains(&(1.0 + e.b))));
    }

    #[test]
    fn zero_function_gives_unbiased_weights() {
        let tf = TestFunction::new(TestFunctionSpec::zero(3, 1.0 / 27.0)).unwrap();
        let s = assemble_slab(&cfg(1_000_000, -1), &tf, &QuadratureConfig::default(), &BuildOptions::default())
            .unwrap();
        assert!(!s.entries.is_empty());
        assert!(s.entries.iter().all(|e| e.b == 0.0));
    }

    #[test]
    fn selberg_weights() {
        let s = selberg_sequence(1, 100).unwrap();
        let a = |n: u64| 1.0 + s.entries[(n - 2) as usize].b;
        assert_eq!(a(97), 0.0);
        assert_eq!(a(6), 2.0);
        assert_eq!(a(12), 0.0);
    }

    #[test]
    fn file_round_trip() {
        let tf = TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, -1)).unwrap();
        let s = assemble_slab(&cfg(1_000_000, -1), &tf, &QuadratureConfig::default(), &BuildOptions::default())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        s.write(&path).unwrap();
        assert_eq!(WeightedSlab::read(&path).unwrap(), s);
        s.write_csv(&dir.path().join("s.csv")).unwrap();
        std::fs::write(&path, b"PSLAB001junk").unwrap();
        assert!(WeightedSlab::read(&path).is_err());
    }
}
