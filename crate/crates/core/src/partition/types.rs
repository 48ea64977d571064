use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PartitionError;

/// A non-decreasing multiset of positive integers. The empty partition is
/// written `E`.
///
/// Ordering is lexicographic on the sorted parts, which lists `P(4)` as
/// `(1,1,1,1) < (1,1,2) < (1,3) < (2,2) < (4)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts `parts`; zero parts are rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self, PartitionError> {
        if parts.contains(&0) {
            return Err(PartitionError::ZeroPart);
        }
        parts.sort_unstable();
        Ok(Self { parts })
    }

    /// `(1, 1, ..., 1)` with `n` ones.
    pub fn ones(n: usize) -> Self {
        Self { parts: vec![1; n] }
    }

    pub fn single(m: u32) -> Self {
        assert!(m > 0);
        Self { parts: vec![m] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `Σ(α)`.
    pub fn sum(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `|α|`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn product(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).product()
    }

    pub fn multiplicities(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for &p in &self.parts {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// True when every part of `other` occurs in `self` at least as often.
    pub fn contains(&self, other: &Partition) -> bool {
        let mine = self.multiplicities();
        other
            .multiplicities()
            .iter()
            .all(|(p, &c)| mine.get(p).copied().unwrap_or(0) >= c)
    }

    /// Multiset union.
    pub fn plus(&self, other: &Partition) -> Partition {
        let mut parts = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() || j < other.parts.len() {
            if j == other.parts.len() || (i < self.parts.len() && self.parts[i] <= other.parts[j]) {
                parts.push(self.parts[i]);
                i += 1;
            } else {
                parts.push(other.parts[j]);
                j += 1;
            }
        }
        Partition { parts }
    }

    /// Multiset difference `self − other`, defined when `other ⊆ self`.
    pub fn minus(&self, other: &Partition) -> Result<Partition, PartitionError> {
        if !self.contains(other) {
            return Err(PartitionError::NotSubset {
                small: other.to_string(),
                big: self.to_string(),
            });
        }
        let mut parts = self.parts.clone();
        for p in &other.parts {
            let pos = parts.iter().position(|q| q == p).expect("checked by contains");
            parts.remove(pos);
        }
        Ok(Partition { parts })
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "E");
        }
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for Partition {
    type Err = PartitionError;

    /// Accepts `E`, `()`, `(1,2,3)` or `1,2,3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() || t == "E" {
            return Ok(Partition::empty());
        }
        let parts = t
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PartitionError::Parse(s.to_string()))?;
        Partition::new(parts)
    }
}

/// Result of [`partition_relations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relations {
    pub is_subset: bool,
    pub sum: Partition,
    pub diff: Option<Partition>,
}

/// `β ⊆ α`, `α + β`, and `α − β` when it is defined.
pub fn partition_relations(alpha: &Partition, beta: &Partition) -> Relations {
    Relations {
        is_subset: alpha.contains(beta),
        sum: alpha.plus(beta),
        diff: alpha.minus(beta).ok(),
    }
}

/// All partitions of `m` in canonical order. `P(0) = {E}`.
pub fn enumerate_partitions(m: u32) -> Vec<Partition> {
    fn rec(rest: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for p in min..=rest {
            // remaining must be either zero or at least p
            if rest - p != 0 && rest - p < p {
                continue;
            }
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, 1, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Number of distinct orderings of the parts of `α`.
pub fn perm_count(alpha: &Partition) -> Result<u64, PartitionError> {
    if alpha.is_empty() {
        return Err(PartitionError::Empty);
    }
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let denom: u64 = alpha.multiplicities().values().map(|&c| fact(c)).product();
    Ok(fact(alpha.len()) / denom)
}

/// All distinct orderings of the parts, in lexicographic order.
pub fn distinct_orderings(alpha: &Partition) -> Vec<Vec<u32>> {
    let mut cur = alpha.parts.clone();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let n = cur.len();
        if n < 2 {
            break;
        }
        let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}
