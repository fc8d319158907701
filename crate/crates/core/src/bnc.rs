//! χ-maps, the χ-order and bi-non-crossing partitions.
//!
//! Positions are 1-based. For a χ-map the χ-order lists the left positions
//! in increasing order followed by the right positions in decreasing order;
//! BNC(χ) is the set of partitions that become non-crossing once their
//! elements are relabelled by χ-rank.

use std::fmt;
use std::ops::{Bound, Range};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::memo::Memo;
use crate::partitions::{self, Mobius, SetPartition, MAX_ENUMERATION_SIZE};
use crate::{Error, Result};

/// Face of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_char(self) -> char {
        match self {
            Side::Left => 'l',
            Side::Right => 'r',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Name of a pair of faces, the colour carried by ε.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairId(Arc<str>);

impl PairId {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PairId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChiMap {
    sides: Vec<Side>,
    /// `order[k]` is the 0-based position holding χ-rank `k`.
    order: Vec<usize>,
    /// Inverse of `order`.
    rank: Vec<usize>,
}

impl ChiMap {
    pub fn new(sides: Vec<Side>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::Size("a chi-map needs n >= 1".into()));
        }
        Ok(Self::new_unchecked(sides))
    }

    /// Also accepts the empty map (χ of the empty word).
    pub(crate) fn new_unchecked(sides: Vec<Side>) -> Self {
        let n = sides.len();
        let mut order: Vec<usize> = (0..n).filter(|&k| sides[k] == Side::Left).collect();
        order.extend((0..n).rev().filter(|&k| sides[k] == Side::Right));
        let mut rank = vec![0; n];
        for (r, &k) in order.iter().enumerate() {
            rank[k] = r;
        }
        Self { sides, order, rank }
    }

    pub fn all_left(n: usize) -> Result<Self> {
        Self::new(vec![Side::Left; n])
    }

    /// χ with the given 1-based left positions; every other position is right.
    pub fn from_left_set(n: usize, lefts: &[usize]) -> Result<Self> {
        let mut sides = vec![Side::Right; n];
        for &i in lefts {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            sides[i - 1] = Side::Left;
        }
        Self::new(sides)
    }

    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    /// Side of 1-based position `i`.
    pub fn side(&self, i: usize) -> Side {
        self.sides[i - 1]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange { index: i, n: self.len() });
        }
        Ok(())
    }

    /// 0-based χ-rank of 1-based position `i`.
    pub fn rank(&self, i: usize) -> usize {
        self.rank[i - 1]
    }

    /// 1-based position at 0-based χ-rank `r`.
    pub fn at_rank(&self, r: usize) -> usize {
        self.order[r] + 1
    }

    /// Positions in χ-order (1-based).
    pub fn chi_order(&self) -> Vec<usize> {
        self.order.iter().map(|k| k + 1).collect()
    }

    /// χ restricted to the given 1-based positions (taken in increasing order).
    pub fn restrict(&self, positions: &[usize]) -> ChiMap {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        ChiMap::new_unchecked(pos.iter().map(|&i| self.sides[i - 1]).collect())
    }
}

impl fmt::Display for ChiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sides {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ChiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChiMap({self})")
    }
}

impl FromStr for ChiMap {
    type Err = Error;

    /// Parses a string over `{l, r}` such as `rllr`.
    fn from_str(s: &str) -> Result<Self> {
        let sides = s
            .trim()
            .chars()
            .map(|c| match c {
                'l' | 'L' => Ok(Side::Left),
                'r' | 'R' => Ok(Side::Right),
                other => Err(Error::Parse(format!("bad side `{other}` in chi `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        ChiMap::new(sides)
    }
}

/// Assignment of a pair to every position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpsMap {
    colors: Vec<PairId>,
}

impl EpsMap {
    pub fn new(colors: Vec<PairId>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::Size("an eps-map needs n >= 1".into()));
        }
        Ok(Self { colors })
    }

    pub(crate) fn new_unchecked(colors: Vec<PairId>) -> Self {
        Self { colors }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[PairId] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> &PairId {
        &self.colors[i - 1]
    }

    pub fn is_constant(&self) -> bool {
        self.colors.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for EpsMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.colors.iter().map(PairId::as_str).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for EpsMap {
    type Err = Error;

    /// Parses a comma-separated colour list such as `p0,p1,p1,p0`.
    fn from_str(s: &str) -> Result<Self> {
        let colors = s
            .split(',')
            .map(|c| {
                let c = c.trim();
                if c.is_empty() {
                    Err(Error::Parse(format!("empty colour in eps `{s}`")))
                } else {
                    Ok(PairId::new(c))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        EpsMap::new(colors)
    }
}

/// A partition of `{1..n}` that is bi-non-crossing for its χ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BncPartition {
    partition: SetPartition,
    chi: ChiMap,
}

impl BncPartition {
    pub fn new(partition: SetPartition, chi: ChiMap) -> Result<Self> {
        if !is_bi_non_crossing(&partition, &chi)? {
            return Err(Error::Order(format!("{partition} is not bi-non-crossing for chi {chi}")));
        }
        Ok(Self { partition, chi })
    }

    pub fn partition(&self) -> &SetPartition {
        &self.partition
    }

    pub fn chi(&self) -> &ChiMap {
        &self.chi
    }

    pub fn discrete(chi: &ChiMap) -> Self {
        Self { partition: SetPartition::discrete(chi.len()), chi: chi.clone() }
    }

    pub fn full(chi: &ChiMap) -> Self {
        Self { partition: SetPartition::full(chi.len()), chi: chi.clone() }
    }
}

impl fmt::Display for BncPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.partition)
    }
}

/// s_χ as a 1-based permutation: entry `k` is the `k`-th position in χ-order.
pub fn s_chi_permutation(chi: &ChiMap) -> Vec<usize> {
    chi.chi_order()
}

/// `i ≺_χ j`.
pub fn chi_precedes(chi: &ChiMap, i: usize, j: usize) -> Result<bool> {
    chi.check_index(i)?;
    chi.check_index(j)?;
    Ok(chi.rank(i) < chi.rank(j))
}

fn bound_range(chi: &ChiMap, lo: Bound<usize>, hi: Bound<usize>) -> Result<Range<usize>> {
    for b in [lo, hi] {
        if let Bound::Included(i) | Bound::Excluded(i) = b {
            chi.check_index(i)?;
        }
    }
    if let (Bound::Included(i) | Bound::Excluded(i), Bound::Included(j) | Bound::Excluded(j)) = (lo, hi) {
        if chi.rank(j) < chi.rank(i) {
            return Err(Error::Order(format!("{j} precedes {i} in chi-order")));
        }
    }
    let start = match lo {
        Bound::Included(i) => chi.rank(i),
        Bound::Excluded(i) => chi.rank(i) + 1,
        Bound::Unbounded => 0,
    };
    let end = match hi {
        Bound::Included(j) => chi.rank(j) + 1,
        Bound::Excluded(j) => chi.rank(j),
        Bound::Unbounded => chi.len(),
    };
    Ok(start..end.max(start))
}

/// χ-interval between two bounds, in natural increasing order.
///
/// `Bound::Unbounded` gives the rays `(−∞, j]_χ` and `[i, ∞)_χ`. Fails if
/// both endpoints are given and `j ≺_χ i`.
pub fn chi_interval_bounds(chi: &ChiMap, lo: Bound<usize>, hi: Bound<usize>) -> Result<Vec<usize>> {
    let range = bound_range(chi, lo, hi)?;
    let mut out: Vec<usize> = range.map(|r| chi.at_rank(r)).collect();
    out.sort_unstable();
    Ok(out)
}

/// `[i, j]_χ`, `[i, j)_χ`, `(i, j]_χ` or `(i, j)_χ` depending on the flags.
pub fn chi_interval(
    chi: &ChiMap,
    i: usize,
    j: usize,
    left_closed: bool,
    right_closed: bool,
) -> Result<Vec<usize>> {
    let lo = if left_closed { Bound::Included(i) } else { Bound::Excluded(i) };
    let hi = if right_closed { Bound::Included(j) } else { Bound::Excluded(j) };
    chi_interval_bounds(chi, lo, hi)
}

/// Block labels listed in χ-order.
fn transported_labels(p: &SetPartition, chi: &ChiMap) -> Vec<usize> {
    (0..chi.len()).map(|r| p.labels()[chi.at_rank(r) - 1]).collect()
}

/// Non-crossing test on a label sequence: a block seen again must be the
/// most recently opened block that is still open.
fn labels_non_crossing(labels: &[usize]) -> bool {
    let blocks = labels.iter().max().map_or(0, |m| m + 1);
    let mut last = vec![0usize; blocks];
    for (k, &l) in labels.iter().enumerate() {
        last[l] = k;
    }
    let mut seen = vec![false; blocks];
    let mut stack: Vec<usize> = Vec::new();
    for (k, &l) in labels.iter().enumerate() {
        if seen[l] {
            if stack.last() != Some(&l) {
                return false;
            }
            if last[l] == k {
                stack.pop();
            }
        } else {
            seen[l] = true;
            if last[l] != k {
                stack.push(l);
            }
        }
    }
    true
}

fn same_len(p: &SetPartition, chi: &ChiMap) -> Result<()> {
    if p.n() != chi.len() {
        return Err(Error::Size(format!("partition of {} elements, chi of length {}", p.n(), chi.len())));
    }
    Ok(())
}

pub fn is_bi_non_crossing(p: &SetPartition, chi: &ChiMap) -> Result<bool> {
    same_len(p, chi)?;
    Ok(labels_non_crossing(&transported_labels(p, chi)))
}

/// Non-crossing labellings of `0..n` (in χ-rank coordinates) such that
/// `allow(k, first)` holds whenever position `k` joins the block opened at
/// position `first`.
fn non_crossing_labellings(n: usize, allow: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    struct State<'a> {
        labels: Vec<usize>,
        firsts: Vec<usize>,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
        allow: &'a dyn Fn(usize, usize) -> bool,
    }
    fn rec(k: usize, st: &mut State<'_>) {
        if k == st.labels.len() {
            st.out.push(st.labels.clone());
            return;
        }
        // open a new block
        let id = st.firsts.len();
        st.firsts.push(k);
        st.stack.push(id);
        st.labels[k] = id;
        rec(k + 1, st);
        st.stack.pop();
        st.firsts.pop();
        // join an open block; everything above it closes
        for depth in (0..st.stack.len()).rev() {
            let b = st.stack[depth];
            if !(st.allow)(k, st.firsts[b]) {
                continue;
            }
            let closed: Vec<usize> = st.stack.drain(depth + 1..).collect();
            st.labels[k] = b;
            rec(k + 1, st);
            st.stack.extend(closed);
        }
    }
    let mut st = State { labels: vec![0; n], firsts: Vec::new(), stack: Vec::new(), out: Vec::new(), allow };
    rec(0, &mut st);
    st.out
}

fn untransport(chi: &ChiMap, rank_labels: &[usize]) -> SetPartition {
    let mut natural = vec![0usize; chi.len()];
    for (r, &l) in rank_labels.iter().enumerate() {
        natural[chi.at_rank(r) - 1] = l;
    }
    SetPartition::from_labels(&natural).expect("n >= 1")
}

const CACHED_SIZE: usize = 8;

fn bnc_cache() -> &'static Memo<ChiMap, Arc<Vec<SetPartition>>> {
    static CACHE: OnceLock<Memo<ChiMap, Arc<Vec<SetPartition>>>> = OnceLock::new();
    CACHE.get_or_init(Memo::default)
}

/// BNC(χ) as plain set partitions, canonical order. Cached for small χ.
pub(crate) fn bnc_set_partitions(chi: &ChiMap) -> Result<Arc<Vec<SetPartition>>> {
    if chi.is_empty() || chi.len() > MAX_ENUMERATION_SIZE {
        return Err(Error::Size(format!(
            "n = {} outside the supported range 1..={MAX_ENUMERATION_SIZE}",
            chi.len()
        )));
    }
    let build = || -> Result<Arc<Vec<SetPartition>>> {
        let mut all: Vec<SetPartition> = non_crossing_labellings(chi.len(), &|_, _| true)
            .iter()
            .map(|l| untransport(chi, l))
            .collect();
        all.sort();
        Ok(Arc::new(all))
    };
    if chi.len() <= CACHED_SIZE {
        bnc_cache().get_or_try_insert(chi, build)
    } else {
        build()
    }
}

/// Partitions in BNC(χ) whose blocks are monochromatic for `colors`
/// (`π ≤ ε`). `colors` is indexed by position − 1.
pub(crate) fn bnc_below<C: PartialEq>(chi: &ChiMap, colors: &[C]) -> Result<Vec<SetPartition>> {
    if chi.len() > MAX_ENUMERATION_SIZE {
        return Err(Error::Size(format!("n = {} exceeds {MAX_ENUMERATION_SIZE}", chi.len())));
    }
    if chi.is_empty() {
        return Ok(Vec::new());
    }
    let by_rank: Vec<&C> = (0..chi.len()).map(|r| &colors[chi.at_rank(r) - 1]).collect();
    let allow = |k: usize, first: usize| by_rank[k] == by_rank[first];
    Ok(non_crossing_labellings(chi.len(), &allow)
        .iter()
        .map(|l| untransport(chi, l))
        .collect())
}

/// All of BNC(χ), canonical order.
pub fn enumerate_bnc(chi: &ChiMap) -> Result<Vec<BncPartition>> {
    Ok(bnc_set_partitions(chi)?
        .iter()
        .map(|p| BncPartition { partition: p.clone(), chi: chi.clone() })
        .collect())
}

fn same_chi(p: &BncPartition, q: &BncPartition) -> Result<()> {
    if p.chi != q.chi {
        return Err(Error::ChiMismatch(format!("{} vs {}", p.chi, q.chi)));
    }
    Ok(())
}

/// Least element of BNC(χ) above both: the partition-lattice join followed
/// by merging crossing blocks until none cross.
pub fn bnc_join(p: &BncPartition, q: &BncPartition) -> Result<BncPartition> {
    same_chi(p, q)?;
    let chi = &p.chi;
    let mut joined = partitions::join(&p.partition, &q.partition)?;
    loop {
        let ranked = transported_labels(&joined, chi);
        match find_crossing(&ranked) {
            None => break,
            Some((a, b)) => {
                let merged: Vec<usize> =
                    joined.labels().iter().map(|&l| if l == b { a } else { l }).collect();
                joined = SetPartition::from_labels(&merged)?;
            }
        }
    }
    Ok(BncPartition { partition: joined, chi: chi.clone() })
}

/// Greatest lower bound; the partition-lattice meet of two bi-non-crossing
/// partitions is again bi-non-crossing.
pub fn bnc_meet(p: &BncPartition, q: &BncPartition) -> Result<BncPartition> {
    same_chi(p, q)?;
    Ok(BncPartition { partition: partitions::meet(&p.partition, &q.partition)?, chi: p.chi.clone() })
}

fn find_crossing(labels: &[usize]) -> Option<(usize, usize)> {
    let n = labels.len();
    for a in 0..n {
        for c in a + 1..n {
            if labels[a] != labels[c] {
                continue;
            }
            for b in a + 1..c {
                if labels[b] == labels[a] {
                    continue;
                }
                if labels[c + 1..].contains(&labels[b]) || labels[..a].contains(&labels[b]) {
                    return Some((labels[a], labels[b]));
                }
            }
        }
    }
    None
}

/// A maximal ε-monochromatic χ-interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiInterval {
    /// Member positions, natural increasing order.
    pub indices: Vec<usize>,
    /// Range of χ-ranks covered.
    pub ranks: Range<usize>,
}

impl fmt::Display for ChiInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Maximal runs of constant colour along the χ-order, listed in χ-order.
pub fn maximal_mono_intervals(chi: &ChiMap, eps: &EpsMap) -> Result<Vec<ChiInterval>> {
    if chi.len() != eps.len() {
        return Err(Error::Size(format!("chi of length {}, eps of length {}", chi.len(), eps.len())));
    }
    Ok(mono_runs(chi, eps.colors()))
}

pub(crate) fn mono_runs<C: PartialEq>(chi: &ChiMap, colors: &[C]) -> Vec<ChiInterval> {
    let mut out = Vec::new();
    let mut start = 0;
    for r in 1..=chi.len() {
        if r == chi.len() || colors[chi.at_rank(r) - 1] != colors[chi.at_rank(start) - 1] {
            let mut indices: Vec<usize> = (start..r).map(|q| chi.at_rank(q)).collect();
            indices.sort_unstable();
            out.push(ChiInterval { indices, ranks: start..r });
            start = r;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Inner,
    Outer,
}

/// Inner/outer label for every block, in canonical block order.
pub fn classify_blocks(p: &BncPartition) -> Vec<(Vec<usize>, BlockKind)> {
    let blocks = p.partition.blocks();
    let kinds = block_kinds(&p.partition, &p.chi);
    blocks.into_iter().zip(kinds).collect()
}

/// Kinds indexed by block label.
pub(crate) fn block_kinds(p: &SetPartition, chi: &ChiMap) -> Vec<BlockKind> {
    let count = p.block_count();
    let mut lo = vec![usize::MAX; count];
    let mut hi = vec![0usize; count];
    for (k, &l) in p.labels().iter().enumerate() {
        let r = chi.rank(k + 1);
        lo[l] = lo[l].min(r);
        hi[l] = hi[l].max(r);
    }
    (0..count)
        .map(|b| {
            let inner = (0..count).any(|c| c != b && lo[c] < lo[b] && hi[b] < hi[c]);
            if inner {
                BlockKind::Inner
            } else {
                BlockKind::Outer
            }
        })
        .collect()
}

fn mobius_cache() -> &'static Memo<ChiMap, Arc<Mobius>> {
    static CACHE: OnceLock<Memo<ChiMap, Arc<Mobius>>> = OnceLock::new();
    CACHE.get_or_init(Memo::default)
}

fn mobius_for(chi: &ChiMap) -> Result<Arc<Mobius>> {
    mobius_cache().get_or_try_insert(chi, || {
        Ok(Arc::new(Mobius::new(bnc_set_partitions(chi)?.as_ref().clone())))
    })
}

/// μ(lower, upper) in BNC(χ).
pub fn bnc_mobius(lower: &BncPartition, upper: &BncPartition) -> Result<i64> {
    same_chi(lower, upper)?;
    mobius_for(&lower.chi)?.value(&lower.partition, &upper.partition)
}

type MobiusColumn = Arc<Vec<(SetPartition, i64)>>;

fn mobius_column_cache() -> &'static Memo<ChiMap, MobiusColumn> {
    static CACHE: OnceLock<Memo<ChiMap, MobiusColumn>> = OnceLock::new();
    CACHE.get_or_init(Memo::default)
}

/// μ(π, 1_n) for every π ∈ BNC(χ).
pub(crate) fn mobius_to_full(chi: &ChiMap) -> Result<MobiusColumn> {
    mobius_column_cache().get_or_try_insert(chi, || {
        Ok(Arc::new(mobius_for(chi)?.values_to(&SetPartition::full(chi.len()))?))
    })
}
