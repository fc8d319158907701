//! Set partitions of `{1, …, n}` ordered by refinement.
//!
//! Elements are numbered from 1 in every public signature, matching the
//! textual syntax `1|2 5 7|3 4|6 8`. A partition is stored as its restricted
//! growth string, which is exactly the canonical form: blocks ordered by least
//! element, elements ascending inside a block.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::memo::Memo;
use crate::{Error, Result};

/// Largest ground set accepted by the enumerators. Bell(12) is about 4.2M.
pub const MAX_ENUMERATION_SIZE: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    /// `labels[k]` is the block index of element `k + 1`; a restricted growth
    /// string (first occurrences appear in order 0, 1, 2, …).
    labels: Vec<usize>,
}

impl SetPartition {
    /// Builds a partition from any labelling of `{1..n}` (equal labels mean
    /// same block). The labelling is canonicalised.
    pub fn from_labels<L: Eq + std::hash::Hash + Clone>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Size("a partition needs n >= 1".into()));
        }
        let mut seen: HashMap<L, usize> = HashMap::new();
        let rgs = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l.clone()).or_insert(next)
            })
            .collect();
        Ok(Self { labels: rgs })
    }

    /// Builds a partition from 1-based blocks, which must cover `{1..n}`
    /// exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Size("a partition needs n >= 1".into()));
        }
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Parse("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > n {
                    return Err(Error::IndexOutOfRange { index: e, n });
                }
                if labels[e - 1] != usize::MAX {
                    return Err(Error::Parse(format!("element {e} appears twice")));
                }
                labels[e - 1] = b;
            }
        }
        if let Some(k) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Parse(format!("element {} is not covered", k + 1)));
        }
        Self::from_labels(&labels)
    }

    pub fn discrete(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Self { labels: (0..n).collect() }
    }

    pub fn full(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Self { labels: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Restricted growth string, indexed by element − 1.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Blocks in canonical order, 1-based.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (k, &l) in self.labels.iter().enumerate() {
            blocks[l].push(k + 1);
        }
        blocks
    }

    /// Whether 1-based elements `i` and `j` share a block.
    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i - 1] == self.labels[j - 1]
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.n()
    }

    pub fn is_full(&self) -> bool {
        self.block_count() == 1
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        f.write_str(&text.join("|"))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self)
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses `1|2 5 7|3 4|6 8`; `n` is the largest element mentioned.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block = part
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad element `{t}` in partition `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if block.is_empty() {
                return Err(Error::Parse(format!("empty block in partition `{s}`")));
            }
            blocks.push(block);
        }
        let n = blocks.iter().flatten().copied().max().unwrap_or(0);
        Self::from_blocks(n, &blocks)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENUMERATION_SIZE {
        return Err(Error::Size(format!(
            "n = {n} outside the supported range 1..={MAX_ENUMERATION_SIZE}"
        )));
    }
    Ok(())
}

fn same_n(p: &SetPartition, q: &SetPartition) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::Size(format!("partitions of {} and {} elements", p.n(), q.n())));
    }
    Ok(())
}

/// Every partition of `{1..n}`, in restricted-growth-string order.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_size(n)?;
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    // maxes[k] = max(labels[..k])
    fn rec(k: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<SetPartition>) {
        if k == labels.len() {
            out.push(SetPartition { labels: labels.clone() });
            return;
        }
        for l in 0..=max + 1 {
            labels[k] = l;
            rec(k + 1, max.max(l), labels, out);
        }
    }
    // element 1 always opens block 0
    rec(1, 0, &mut labels, &mut out);
    Ok(out)
}

/// True iff every block of `p` lies inside some block of `q`.
pub fn refines(p: &SetPartition, q: &SetPartition) -> Result<bool> {
    same_n(p, q)?;
    let mut image = vec![usize::MAX; p.block_count()];
    for (lp, lq) in p.labels.iter().zip(&q.labels) {
        if image[*lp] == usize::MAX {
            image[*lp] = *lq;
        } else if image[*lp] != *lq {
            return Ok(false);
        }
    }
    Ok(true)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut x = x;
    while parent[x] != r {
        let next = parent[x];
        parent[x] = r;
        x = next;
    }
    r
}

/// Finest partition coarser than both arguments.
pub fn join(p: &SetPartition, q: &SetPartition) -> Result<SetPartition> {
    same_n(p, q)?;
    let n = p.n();
    let mut parent: Vec<usize> = (0..n).collect();
    for labels in [&p.labels, &q.labels] {
        let mut first: HashMap<usize, usize> = HashMap::new();
        for (k, &l) in labels.iter().enumerate() {
            let f = *first.entry(l).or_insert(k);
            let (a, b) = (find(&mut parent, f), find(&mut parent, k));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|k| find(&mut parent, k)).collect();
    SetPartition::from_labels(&roots)
}

/// Blockwise intersections.
pub fn meet(p: &SetPartition, q: &SetPartition) -> Result<SetPartition> {
    same_n(p, q)?;
    let pairs: Vec<(usize, usize)> = p.labels.iter().copied().zip(q.labels.iter().copied()).collect();
    SetPartition::from_labels(&pairs)
}

/// Möbius function of a finite sub-lattice of partitions, memoised.
///
/// The universe must contain the whole interval `[lower, upper]` of the
/// sub-lattice of interest; the endpoints themselves are always included.
#[derive(Debug, Clone)]
pub struct Mobius {
    universe: Vec<SetPartition>,
    memo: Memo<(SetPartition, SetPartition), i64>,
}

impl Mobius {
    pub fn new(universe: Vec<SetPartition>) -> Self {
        Self { universe, memo: Memo::default() }
    }

    fn interval(&self, lower: &SetPartition, upper: &SetPartition) -> Result<Vec<SetPartition>> {
        same_n(lower, upper)?;
        if !refines(lower, upper)? {
            return Err(Error::Order(format!("{lower} does not refine {upper}")));
        }
        let mut members: Vec<SetPartition> = Vec::new();
        for z in self.universe.iter().chain([lower, upper]) {
            if z.n() == lower.n() && refines(lower, z)? && refines(z, upper)? {
                members.push(z.clone());
            }
        }
        members.sort();
        members.dedup();
        // finer partitions first: strict refinement strictly increases the block count
        members.sort_by_key(|z| std::cmp::Reverse(z.block_count()));
        Ok(members)
    }

    /// μ(lower, upper) by μ(x, x) = 1, μ(x, y) = −Σ_{x ≤ z < y} μ(x, z).
    pub fn value(&self, lower: &SetPartition, upper: &SetPartition) -> Result<i64> {
        let key = (lower.clone(), upper.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v);
        }
        let members = self.interval(lower, upper)?;
        let mut mu: Vec<i64> = Vec::with_capacity(members.len());
        for (k, z) in members.iter().enumerate() {
            let v = if z == lower {
                1
            } else {
                let mut s = 0i64;
                for (y, my) in members[..k].iter().zip(&mu) {
                    if y != z && refines(y, z)? {
                        s += my;
                    }
                }
                -s
            };
            mu.push(v);
            self.memo.insert((lower.clone(), z.clone()), v);
        }
        Ok(self.memo.get(&key).expect("upper is in its own interval"))
    }

    /// μ(x, upper) for every `x` in the universe below `upper`, by the dual
    /// recursion μ(x, y) = −Σ_{x < z ≤ y} μ(z, y).
    pub fn values_to(&self, upper: &SetPartition) -> Result<Vec<(SetPartition, i64)>> {
        let mut members: Vec<SetPartition> = Vec::new();
        for z in self.universe.iter().chain([upper]) {
            if z.n() == upper.n() && refines(z, upper)? {
                members.push(z.clone());
            }
        }
        members.sort();
        members.dedup();
        // coarser first
        members.sort_by_key(|z| z.block_count());
        let mut out: Vec<(SetPartition, i64)> = Vec::with_capacity(members.len());
        for x in &members {
            let v = if x == upper {
                1
            } else {
                let mut s = 0i64;
                for (z, mz) in &out {
                    if z != x && refines(x, z)? {
                        s += mz;
                    }
                }
                -s
            };
            self.memo.insert((x.clone(), upper.clone()), v);
            out.push((x.clone(), v));
        }
        Ok(out)
    }
}

/// One-shot μ(lower, upper) over `universe`.
pub fn lattice_mobius(
    lower: &SetPartition,
    upper: &SetPartition,
    universe: &[SetPartition],
) -> Result<i64> {
    Mobius::new(universe.to_vec()).value(lower, upper)
}
