//! Letters, words and moment oracles.
//!
//! A [`Letter`] is a generator tagged with its pair and face. A
//! [`PureDistribution`] gives the moments of words inside one pair; a
//! [`Family`] collects several pairs; a [`JointDistribution`] is a moment
//! oracle for mixed words, either an explicit table or a product built from a
//! family.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;

use crate::bnc::{ChiMap, EpsMap, PairId, Side};
use crate::cumulants::{self, CumulantCache};
use crate::memo::Memo;
use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub symbol: Symbol,
    pub pair: PairId,
    pub side: Side,
}

impl Letter {
    pub fn new(symbol: &str, pair: &PairId, side: Side) -> Self {
        Self { symbol: Symbol::new(symbol), pair: pair.clone(), side }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol)
    }
}

/// A finite product of letters; the empty word is the unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> &Letter {
        &self.0[i - 1]
    }

    /// True when every letter comes from the same pair (vacuously for the
    /// empty word).
    pub fn is_pure(&self) -> bool {
        self.0.windows(2).all(|w| w[0].pair == w[1].pair)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    /// Letters at the given 1-based positions, natural order.
    pub(crate) fn pick(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&i| self.0[i - 1].clone()).collect())
    }

    /// Letters whose 0-based index has `mask` bit set.
    pub(crate) fn pick_mask(&self, mask: u64) -> Word {
        Word(
            self.0
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, l)| l.clone())
                .collect(),
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let s: Vec<&str> = self.0.iter().map(|l| l.symbol.as_str()).collect();
        f.write_str(&s.join(" "))
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Sides of a word, position by position.
pub fn chi_of(w: &Word) -> ChiMap {
    ChiMap::new_unchecked(w.0.iter().map(|l| l.side).collect())
}

/// Pairs of a word, position by position.
pub fn eps_of(w: &Word) -> EpsMap {
    EpsMap::new_unchecked(w.0.iter().map(|l| l.pair.clone()).collect())
}

/// `z_B`: the letters at `indices` in increasing natural order.
pub fn subword(w: &Word, indices: &[usize]) -> Result<Word> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&i| i == 0 || i > w.len()) {
        return Err(Error::IndexOutOfRange { index: bad, n: w.len() });
    }
    Ok(w.pick(&sorted))
}

/// A rational linear combination of words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScalarWordSum {
    terms: BTreeMap<Word, Rational>,
}

impl ScalarWordSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_word(w: Word) -> Self {
        let mut s = Self::new();
        s.add(w, rational::one());
        s
    }

    pub fn add(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<Word, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenation product, extended bilinearly.
    pub fn mul(&self, other: &ScalarWordSum) -> ScalarWordSum {
        let mut out = ScalarWordSum::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add(a.concat(b), ca * cb);
            }
        }
        out
    }

    /// Expansion of `(z_1 − c_1)⋯(z_n − c_n)`.
    pub fn shifted_product(w: &Word, shifts: &[Rational]) -> Result<ScalarWordSum> {
        if shifts.len() != w.len() {
            return Err(Error::Size(format!("{} shifts for a word of length {}", shifts.len(), w.len())));
        }
        if w.len() > 63 {
            return Err(Error::Size("word too long to expand".into()));
        }
        let n = w.len();
        let mut out = ScalarWordSum::new();
        for mask in 0..1u64 << n {
            let mut c = rational::one();
            for (k, shift) in shifts.iter().enumerate() {
                if mask >> k & 1 == 0 {
                    c *= -shift;
                }
            }
            out.add(w.pick_mask(mask), c);
        }
        Ok(out)
    }
}

/// Anything that can produce moments of words.
pub trait MomentOracle: Sync {
    /// φ(w).
    fn moment(&self, w: &Word) -> Result<Rational>;

    /// θ(w) for oracles carrying a second state.
    fn theta(&self, w: &Word) -> Result<Rational> {
        Err(Error::Mode(format!("no theta-layer available for `{w}`")))
    }

    /// Persistent cache for cumulant recursions, if the oracle keeps one.
    fn cumulant_cache(&self) -> Option<&CumulantCache> {
        None
    }
}

#[derive(Debug, Clone)]
pub enum PureBacking {
    /// Complete moment table up to `max_degree`.
    Moments(HashMap<Word, Rational>),
    /// Cumulant table; unlisted words have cumulant zero.
    Cumulants(HashMap<Word, Rational>),
    /// Closed-form moments of a Haar pair: letters commute and carry a power
    /// of ±1; φ is 1 when the net left power equals the net right power.
    Haar(HashMap<Symbol, i64>),
}

/// Distribution of the words inside one pair of faces.
#[derive(Debug, Clone)]
pub struct PureDistribution {
    pair: PairId,
    left: Vec<Letter>,
    right: Vec<Letter>,
    backing: PureBacking,
    max_degree: usize,
    theta: Option<HashMap<Word, Rational>>,
    derived_moments: Memo<Word, Rational>,
    cache: CumulantCache,
}

impl PureDistribution {
    fn build(
        pair: &PairId,
        left: &[&str],
        right: &[&str],
        backing: PureBacking,
        max_degree: usize,
    ) -> Result<Self> {
        if max_degree == 0 {
            return Err(Error::Spec(format!("pair `{pair}`: max_degree must be positive")));
        }
        let mut seen = HashSet::new();
        for s in left.iter().chain(right) {
            if !seen.insert(*s) {
                return Err(Error::Spec(format!("pair `{pair}`: symbol `{s}` declared twice")));
            }
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::Spec(format!("pair `{pair}`: bad symbol `{s}`")));
            }
        }
        let d = Self {
            pair: pair.clone(),
            left: left.iter().map(|s| Letter::new(s, pair, Side::Left)).collect(),
            right: right.iter().map(|s| Letter::new(s, pair, Side::Right)).collect(),
            backing,
            max_degree,
            theta: None,
            derived_moments: Memo::default(),
            cache: CumulantCache::default(),
        };
        match &d.backing {
            PureBacking::Moments(t) | PureBacking::Cumulants(t) => {
                for w in t.keys() {
                    d.check_word(w)?;
                }
            }
            PureBacking::Haar(_) => {}
        }
        if let PureBacking::Moments(t) = &d.backing {
            if let Some(v) = t.get(&Word::empty()) {
                if !v.is_one() {
                    return Err(Error::Spec(format!("pair `{pair}`: moment of the empty word must be 1")));
                }
            }
        }
        Ok(d)
    }

    /// Moment-table backed pair; the table must list every word up to
    /// `max_degree` (the empty word may be omitted).
    pub fn from_moments(
        pair: &PairId,
        left: &[&str],
        right: &[&str],
        max_degree: usize,
        moments: HashMap<Word, Rational>,
    ) -> Result<Self> {
        Self::build(pair, left, right, PureBacking::Moments(moments), max_degree)
    }

    /// Cumulant-table backed pair; unlisted cumulants are zero, so moments
    /// of every length are determined.
    pub fn from_cumulants(
        pair: &PairId,
        left: &[&str],
        right: &[&str],
        max_degree: usize,
        cumulants: HashMap<Word, Rational>,
    ) -> Result<Self> {
        let mut cumulants = cumulants;
        cumulants.retain(|_, v| !v.is_zero());
        Self::build(pair, left, right, PureBacking::Cumulants(cumulants), max_degree)
    }

    /// Attaches the θ-layer (moments of the second state, same completeness
    /// rule as moment tables).
    pub fn with_theta(mut self, theta: HashMap<Word, Rational>) -> Result<Self> {
        for w in theta.keys() {
            self.check_word(w)?;
        }
        self.theta = Some(theta);
        self.cache = CumulantCache::default();
        Ok(self)
    }

    pub fn pair(&self) -> &PairId {
        &self.pair
    }

    pub fn left_letters(&self) -> &[Letter] {
        &self.left
    }

    pub fn right_letters(&self) -> &[Letter] {
        &self.right
    }

    pub fn letters(&self) -> impl Iterator<Item = &Letter> {
        self.left.iter().chain(&self.right)
    }

    pub fn letter(&self, symbol: &str) -> Result<Letter> {
        self.letters()
            .find(|l| l.symbol.as_str() == symbol)
            .cloned()
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn backing(&self) -> &PureBacking {
        &self.backing
    }

    pub fn has_theta(&self) -> bool {
        self.theta.is_some()
    }

    pub fn cache(&self) -> &CumulantCache {
        &self.cache
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        for l in w.letters() {
            if !self.letters().any(|m| m == l) {
                return Err(Error::Spec(format!(
                    "word `{w}` uses `{}`, which is not a generator of pair `{}`",
                    l.symbol, self.pair
                )));
            }
        }
        Ok(())
    }

    fn table_lookup(&self, table: &HashMap<Word, Rational>, w: &Word) -> Result<Rational> {
        if w.is_empty() {
            return Ok(rational::one());
        }
        if w.len() > self.max_degree {
            return Err(Error::InsufficientData { word: w.to_string() });
        }
        table.get(w).cloned().ok_or_else(|| Error::IncompleteTable {
            pair: self.pair.to_string(),
            word: w.to_string(),
        })
    }

    /// κ of a word inside this pair.
    pub fn cumulant(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        match &self.backing {
            PureBacking::Cumulants(t) => Ok(t.get(w).cloned().unwrap_or_else(Rational::zero)),
            _ => cumulants::kappa(self, w),
        }
    }

    /// 𝒦 of a word inside this pair, from the θ-layer.
    pub fn conditional_cumulant(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        cumulants::conditional_kappa(self, w)
    }

    /// Every word over this pair's generators of length `1..=max_len`.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let alphabet: Vec<Letter> = self.letters().cloned().collect();
        all_words(&alphabet, 1, max_len)
    }
}

impl MomentOracle for PureDistribution {
    fn moment(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        match &self.backing {
            PureBacking::Moments(t) => self.table_lookup(t, w),
            PureBacking::Cumulants(t) => {
                if w.is_empty() {
                    return Ok(rational::one());
                }
                self.derived_moments.get_or_try_insert(w, || {
                    cumulants::moments_from_cumulants(
                        &|b: &Word| Ok(t.get(b).cloned().unwrap_or_else(Rational::zero)),
                        w,
                    )
                })
            }
            PureBacking::Haar(powers) => {
                let mut net = 0i64;
                for l in w.letters() {
                    let p = powers[&l.symbol];
                    net += if l.side == Side::Left { p } else { -p };
                }
                Ok(if net == 0 { rational::one() } else { rational::zero() })
            }
        }
    }

    fn theta(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        match &self.theta {
            Some(t) => self.table_lookup(t, w),
            None => Err(Error::Mode(format!("pair `{}` has no theta-layer", self.pair))),
        }
    }

    fn cumulant_cache(&self) -> Option<&CumulantCache> {
        Some(&self.cache)
    }
}

/// Semicircular pair: only second-order cumulants, given per unordered side
/// pattern as `(ℓℓ, ℓr, rr)`. Symbols are `{pair}_sl` and `{pair}_sr`.
pub fn builtin_semicircular_pair(pair: &PairId, cov: [Rational; 3]) -> PureDistribution {
    let sl = format!("{pair}_sl");
    let sr = format!("{pair}_sr");
    let l = Letter::new(&sl, pair, Side::Left);
    let r = Letter::new(&sr, pair, Side::Right);
    let [ll, lr, rr] = cov;
    let table: HashMap<Word, Rational> = [
        (Word(vec![l.clone(), l.clone()]), ll),
        (Word(vec![l.clone(), r.clone()]), lr.clone()),
        (Word(vec![r.clone(), l.clone()]), lr),
        (Word(vec![r.clone(), r.clone()]), rr),
    ]
    .into_iter()
    .collect();
    PureDistribution::from_cumulants(pair, &[&sl], &[&sr], 2, table).expect("builtin symbols are valid")
}

/// The all-ones covariance semicircular pair.
pub fn standard_semicircular_pair(pair: &PairId) -> PureDistribution {
    builtin_semicircular_pair(pair, [rational::one(), rational::one(), rational::one()])
}

/// Haar pair `(u_ℓ, u_r) ~ (u, u*)`. Symbols: `{pair}_ul`, `{pair}_ul*`,
/// `{pair}_ur`, `{pair}_ur*`.
pub fn builtin_haar_pair(pair: &PairId) -> PureDistribution {
    let names = [format!("{pair}_ul"), format!("{pair}_ul*"), format!("{pair}_ur"), format!("{pair}_ur*")];
    let powers: HashMap<Symbol, i64> =
        names.iter().zip([1, -1, 1, -1]).map(|(n, p)| (Symbol::new(n), p)).collect();
    PureDistribution::build(
        pair,
        &[&names[0], &names[1]],
        &[&names[2], &names[3]],
        PureBacking::Haar(powers),
        usize::MAX,
    )
    .expect("builtin symbols are valid")
}

/// Several pairs of faces with globally unique symbols.
#[derive(Debug, Clone, Default)]
pub struct Family {
    pures: BTreeMap<PairId, PureDistribution>,
    symbols: BTreeMap<Symbol, Letter>,
}

impl Family {
    pub fn new(pures: Vec<PureDistribution>) -> Result<Self> {
        let mut family = Family::default();
        for p in pures {
            family.push(p)?;
        }
        Ok(family)
    }

    pub fn push(&mut self, pure: PureDistribution) -> Result<()> {
        if self.pures.contains_key(pure.pair()) {
            return Err(Error::Spec(format!("pair `{}` declared twice", pure.pair())));
        }
        for l in pure.letters() {
            if self.symbols.insert(l.symbol.clone(), l.clone()).is_some() {
                return Err(Error::Spec(format!("symbol `{}` declared in two pairs", l.symbol)));
            }
        }
        self.pures.insert(pure.pair().clone(), pure);
        Ok(())
    }

    pub fn pure(&self, pair: &PairId) -> Result<&PureDistribution> {
        self.pures.get(pair).ok_or_else(|| Error::UnknownPair(pair.to_string()))
    }

    pub fn pures(&self) -> impl Iterator<Item = &PureDistribution> {
        self.pures.values()
    }

    pub fn pair_ids(&self) -> Vec<PairId> {
        self.pures.keys().cloned().collect()
    }

    pub fn letter(&self, symbol: &str) -> Result<Letter> {
        self.symbols
            .get(&Symbol::new(symbol))
            .cloned()
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.symbols.values().cloned().collect()
    }

    /// Parses space-separated symbols.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace().map(|s| self.letter(s)).collect()
    }

    pub fn has_theta(&self) -> bool {
        self.pures.values().all(PureDistribution::has_theta)
    }
}

/// The family read as its bi-free product (θ as the conditional product),
/// without memoization of mixed moments.
impl MomentOracle for Family {
    fn moment(&self, w: &Word) -> Result<Rational> {
        cumulants::bifree_product_moment(self, w)
    }

    fn theta(&self, w: &Word) -> Result<Rational> {
        cumulants::conditional_product_theta(self, w)
    }
}

/// How a joint distribution produces mixed moments.
#[derive(Debug, Clone)]
pub enum Mode {
    /// Every moment read from a table complete up to `max_degree`.
    ExplicitTable {
        phi: HashMap<Word, Rational>,
        theta: Option<HashMap<Word, Rational>>,
        max_degree: usize,
    },
    /// Bi-free product of the family.
    BifreeProduct,
    /// Conditionally bi-free product (φ and θ) of a family with θ-layers.
    ConditionalProduct,
    /// Bi-free product with additive corrections on listed words.
    Perturbed { deltas: BTreeMap<Word, Rational> },
}

/// Moment oracle for mixed words.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    family: Family,
    letters: BTreeMap<Symbol, Letter>,
    mode: Mode,
    phi_memo: Memo<Word, Rational>,
    theta_memo: Memo<Word, Rational>,
    cache: CumulantCache,
}

impl JointDistribution {
    fn with_mode(family: Family, letters: BTreeMap<Symbol, Letter>, mode: Mode) -> Self {
        Self {
            family,
            letters,
            mode,
            phi_memo: Memo::default(),
            theta_memo: Memo::default(),
            cache: CumulantCache::default(),
        }
    }

    pub fn bifree_product(family: Family) -> Self {
        let letters = family.symbols.clone();
        Self::with_mode(family, letters, Mode::BifreeProduct)
    }

    pub fn conditional_product(family: Family) -> Result<Self> {
        if !family.has_theta() {
            return Err(Error::Mode("conditional product needs a theta-layer on every pair".into()));
        }
        let letters = family.symbols.clone();
        Ok(Self::with_mode(family, letters, Mode::ConditionalProduct))
    }

    /// Bi-free product with `deltas[w]` added to φ(w).
    pub fn perturbed(family: Family, deltas: BTreeMap<Word, Rational>) -> Result<Self> {
        for w in deltas.keys() {
            for l in w.letters() {
                family.letter(l.symbol.as_str())?;
            }
        }
        let letters = family.symbols.clone();
        Ok(Self::with_mode(family, letters, Mode::Perturbed { deltas }))
    }

    /// Explicit moment table over `letters`, complete up to `max_degree`.
    pub fn from_table(
        letters: Vec<Letter>,
        phi: HashMap<Word, Rational>,
        theta: Option<HashMap<Word, Rational>>,
        max_degree: usize,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for l in letters {
            if map.insert(l.symbol.clone(), l.clone()).is_some() {
                return Err(Error::Spec(format!("symbol `{}` declared twice", l.symbol)));
            }
        }
        Ok(Self::with_mode(Family::default(), map, Mode::ExplicitTable { phi, theta, max_degree }))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.letters.values().cloned().collect()
    }

    pub fn letter(&self, symbol: &str) -> Result<Letter> {
        self.letters
            .get(&Symbol::new(symbol))
            .cloned()
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace().map(|s| self.letter(s)).collect()
    }

    pub fn pair_ids(&self) -> Vec<PairId> {
        let mut ids: Vec<PairId> = self.letters.values().map(|l| l.pair.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    fn check_letters(&self, w: &Word) -> Result<()> {
        for l in w.letters() {
            match self.letters.get(&l.symbol) {
                Some(m) if m == l => {}
                _ => return Err(Error::UnknownSymbol(l.symbol.to_string())),
            }
        }
        Ok(())
    }

    fn table_value(table: &HashMap<Word, Rational>, max_degree: usize, w: &Word) -> Result<Rational> {
        if w.is_empty() {
            return Ok(rational::one());
        }
        if w.len() > max_degree {
            return Err(Error::InsufficientData { word: w.to_string() });
        }
        table
            .get(w)
            .cloned()
            .ok_or_else(|| Error::IncompleteTable { pair: "joint".into(), word: w.to_string() })
    }
}

impl MomentOracle for JointDistribution {
    fn moment(&self, w: &Word) -> Result<Rational> {
        self.check_letters(w)?;
        if w.is_empty() {
            return Ok(rational::one());
        }
        match &self.mode {
            Mode::ExplicitTable { phi, max_degree, .. } => Self::table_value(phi, *max_degree, w),
            Mode::BifreeProduct | Mode::ConditionalProduct => self
                .phi_memo
                .get_or_try_insert(w, || cumulants::bifree_product_moment(&self.family, w)),
            Mode::Perturbed { deltas } => self.phi_memo.get_or_try_insert(w, || {
                let base = cumulants::bifree_product_moment(&self.family, w)?;
                Ok(match deltas.get(w) {
                    Some(d) => base + d,
                    None => base,
                })
            }),
        }
    }

    fn theta(&self, w: &Word) -> Result<Rational> {
        self.check_letters(w)?;
        if w.is_empty() {
            return Ok(rational::one());
        }
        match &self.mode {
            Mode::ExplicitTable { theta: Some(t), max_degree, .. } => Self::table_value(t, *max_degree, w),
            Mode::ConditionalProduct => self
                .theta_memo
                .get_or_try_insert(w, || cumulants::conditional_product_theta(&self.family, w)),
            _ => Err(Error::Mode(format!("no theta-layer available for `{w}`"))),
        }
    }

    fn cumulant_cache(&self) -> Option<&CumulantCache> {
        Some(&self.cache)
    }
}

/// Σ coeff · φ(word).
pub fn evaluate<O: MomentOracle + ?Sized>(d: &O, s: &ScalarWordSum) -> Result<Rational> {
    let mut total = rational::zero();
    for (w, c) in s.terms() {
        total += c * d.moment(w)?;
    }
    Ok(total)
}

/// Σ coeff · θ(word).
pub fn evaluate_theta<O: MomentOracle + ?Sized>(d: &O, s: &ScalarWordSum) -> Result<Rational> {
    let mut total = rational::zero();
    for (w, c) in s.terms() {
        total += c * d.theta(w)?;
    }
    Ok(total)
}

/// Every word over `alphabet` with length in `min_len..=max_len`, shorter
/// words first.
pub fn all_words(alphabet: &[Letter], min_len: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer: Vec<Word> = vec![Word::empty()];
    for len in 1..=max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for l in alphabet {
                let mut v = w.0.clone();
                v.push(l.clone());
                next.push(Word(v));
            }
        }
        layer = next;
        if len >= min_len {
            out.extend(layer.iter().cloned());
        }
    }
    if min_len == 0 {
        out.insert(0, Word::empty());
    }
    out
}

/// Random rationals and random tables, used for randomized verification.
pub mod random {
    use super::*;

    /// A small random rational `p/q` with `|p| ≤ 4`, `1 ≤ q ≤ 3`.
    pub fn small_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
        rational::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
    }

    /// Nonzero variant of [`small_rational`].
    pub fn small_nonzero_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
        loop {
            let r = small_rational(rng);
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// A pair whose moment table (all words up to `max_degree`) is filled
    /// with random small rationals.
    pub fn random_pure<R: Rng + ?Sized>(
        pair: &PairId,
        left: &[&str],
        right: &[&str],
        max_degree: usize,
        rng: &mut R,
    ) -> PureDistribution {
        let alphabet: Vec<Letter> = left
            .iter()
            .map(|s| Letter::new(s, pair, Side::Left))
            .chain(right.iter().map(|s| Letter::new(s, pair, Side::Right)))
            .collect();
        let table = all_words(&alphabet, 1, max_degree)
            .into_iter()
            .map(|w| (w, small_rational(rng)))
            .collect();
        PureDistribution::from_moments(pair, left, right, max_degree, table).expect("generated table is valid")
    }

    /// Adds a random θ-layer to a moment-backed pair.
    pub fn with_random_theta<R: Rng + ?Sized>(pure: PureDistribution, rng: &mut R) -> PureDistribution {
        let words = pure.words_up_to(pure.max_degree());
        let theta = words.into_iter().map(|w| (w, small_rational(rng))).collect();
        pure.with_theta(theta).expect("generated theta table is valid")
    }

    /// Explicit joint table over `letters`, all words up to `max_degree`.
    pub fn random_joint_table<R: Rng + ?Sized>(
        letters: &[Letter],
        max_degree: usize,
        with_theta: bool,
        rng: &mut R,
    ) -> JointDistribution {
        let words = all_words(letters, 1, max_degree);
        let phi = words.iter().map(|w| (w.clone(), small_rational(rng))).collect();
        let theta = with_theta.then(|| words.iter().map(|w| (w.clone(), small_rational(rng))).collect());
        JointDistribution::from_table(letters.to_vec(), phi, theta, max_degree).expect("letters are distinct")
    }
}
