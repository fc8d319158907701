//! The taur map and its evaluation, the free liberation gradient, moments of
//! the free unitary Brownian motion, and the order-t expansion of a word
//! conjugated by a bi-free unitary Brownian motion.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bnc::{PairId, Side};
use crate::ncp::{all_words, chi_of, standard_semicircular_pair, Family, JointDistribution, Letter, MomentOracle, Word};
use crate::rational::{self, render, render_signed, Rational};
use crate::{Error, Result};

/// Formal sum of `left ⊗ right` word pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TensorSum {
    terms: BTreeMap<(Word, Word), Rational>,
}

impl TensorSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, left: Word, right: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((left, right)) {
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

    pub fn terms(&self) -> &BTreeMap<(Word, Word), Rational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `left ⊗ right` (zero when absent).
    pub fn coefficient(&self, left: &Word, right: &Word) -> Rational {
        self.terms.get(&(left.clone(), right.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    /// One line per term: `±p/q · [left] ⊗ [right]`.
    pub fn lines(&self) -> Vec<String> {
        self.terms
            .iter()
            .map(|((l, r), c)| format!("{} · [{l}] ⊗ [{r}]", render_signed(c)))
            .collect()
    }
}

impl fmt::Display for TensorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&self.lines().join("\n"))
    }
}

/// Letters of `w` at the χ-ranks in `ranks`, and the remaining letters,
/// both in natural order.
fn split_by_ranks(w: &Word, chi: &crate::bnc::ChiMap, ranks: std::ops::Range<usize>) -> (Word, Word) {
    let inside: BTreeSet<usize> = ranks.map(|r| chi.at_rank(r)).collect();
    let outside: Vec<usize> = (1..=w.len()).filter(|i| !inside.contains(i)).collect();
    let inside: Vec<usize> = inside.into_iter().collect();
    (w.pick(&outside), w.pick(&inside))
}

/// ⵣ_ι(w): for every χ-ordered pair `i ⪯ j` of ι-letters, the four
/// interval splits with alternating signs.
pub fn taur(w: &Word, iota: &PairId) -> TensorSum {
    let chi = chi_of(w);
    let mut ranks: Vec<usize> = (1..=w.len()).filter(|&i| &w.letter(i).pair == iota).map(|i| chi.rank(i)).collect();
    ranks.sort_unstable();
    let mut out = TensorSum::new();
    for (a, &ri) in ranks.iter().enumerate() {
        for &rj in &ranks[a..] {
            let splits = [(ri..rj + 1, 1), (ri..rj, -1), (ri + 1..rj + 1, -1), (ri + 1..rj, 1)];
            for (range, sign) in splits {
                let range = range.start..range.end.max(range.start);
                let (outside, inside) = split_by_ranks(w, &chi, range);
                out.add(outside, inside, rational::int(sign));
            }
        }
    }
    out
}

/// Σ coeff · φ(left) · φ(right).
pub fn eval_tensor<O: MomentOracle + ?Sized>(d: &O, t: &TensorSum) -> Result<Rational> {
    let mut total = rational::zero();
    for ((l, r), c) in t.terms() {
        let fl = d.moment(l)?;
        if fl.is_zero() {
            continue;
        }
        total += c * fl * d.moment(r)?;
    }
    Ok(total)
}

/// Outcome of [`taur_test`]. `certified` is false when more than two pairs
/// are in scope, where a nonzero or zero result carries no guarantee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaurVerdict {
    pub outcome: TaurOutcome,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaurOutcome {
    Holds { words: usize },
    Counterexample { word: Word, value: Rational },
}

impl TaurVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, TaurOutcome::Holds { .. })
    }
}

impl fmt::Display for TaurVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            TaurOutcome::Holds { words } => write!(f, "HOLDS words={words}")?,
            TaurOutcome::Counterexample { word, value } => {
                let symbols: Vec<&str> = word.letters().iter().map(|l| l.symbol.as_str()).collect();
                write!(f, "COUNTEREXAMPLE word={} value={}", symbols.join(","), render(value))?
            }
        }
        write!(f, " certified={}", if self.certified { "yes" } else { "no" })
    }
}

/// First left and first right generator of every pair in `letters`.
pub fn one_per_face(letters: &[Letter]) -> Vec<Letter> {
    let mut seen = BTreeSet::new();
    letters.iter().filter(|l| seen.insert((l.pair.clone(), l.side))).cloned().collect()
}

/// Checks `(φ⊗φ)∘ⵣ_ι = 0` on every word up to `max_len` over `alphabet`.
pub fn taur_test<O: MomentOracle + ?Sized>(
    d: &O,
    alphabet: &[Letter],
    iota: &PairId,
    max_len: usize,
) -> Result<TaurVerdict> {
    if !(1..=8).contains(&max_len) {
        return Err(Error::Domain(format!("max_len must lie in 1..=8, got {max_len}")));
    }
    let pairs: BTreeSet<&PairId> = alphabet.iter().map(|l| &l.pair).collect();
    if !pairs.contains(iota) {
        return Err(Error::UnknownPair(iota.to_string()));
    }
    let certified = pairs.len() == 2;
    let words = all_words(alphabet, 1, max_len);
    for w in &words {
        let value = eval_tensor(d, &taur(w, iota))?;
        if !value.is_zero() {
            return Ok(TaurVerdict { outcome: TaurOutcome::Counterexample { word: w.clone(), value }, certified });
        }
    }
    Ok(TaurVerdict { outcome: TaurOutcome::Holds { words: words.len() }, certified })
}

/// Free liberation gradient on an all-left word:
/// `Σ_{i ∈ ι} −z_{<i} ⊗ z_{≥i} + z_{≤i} ⊗ z_{>i}`.
pub fn free_delta(w: &Word, iota: &PairId) -> Result<TensorSum> {
    if let Some(l) = w.letters().iter().find(|l| l.side == Side::Right) {
        return Err(Error::Domain(format!("free_delta needs an all-left word; `{}` is right-sided", l.symbol)));
    }
    let n = w.len();
    let mut out = TensorSum::new();
    for i in 1..=n {
        if &w.letter(i).pair != iota {
            continue;
        }
        let before: Vec<usize> = (1..i).collect();
        let from: Vec<usize> = (i..=n).collect();
        let upto: Vec<usize> = (1..=i).collect();
        let after: Vec<usize> = (i + 1..=n).collect();
        out.add(w.pick(&before), w.pick(&from), rational::int(-1));
        out.add(w.pick(&upto), w.pick(&after), rational::one());
    }
    Ok(out)
}

/// `Σ_i p_i(t)·e^{ρ_i t}` with rational polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpPoly {
    /// `(coefficients by ascending degree, rate)`, rates distinct,
    /// polynomials nonzero with no trailing zeros.
    terms: Vec<(Vec<Rational>, Rational)>,
}

impl ExpPoly {
    pub fn new(terms: Vec<(Vec<Rational>, Rational)>) -> Self {
        let mut merged: BTreeMap<Rational, Vec<Rational>> = BTreeMap::new();
        for (poly, rate) in terms {
            let acc = merged.entry(rate).or_default();
            if acc.len() < poly.len() {
                acc.resize(poly.len(), rational::zero());
            }
            for (a, c) in acc.iter_mut().zip(poly) {
                *a += c;
            }
        }
        let mut terms: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for (rate, mut poly) in merged.into_iter().rev() {
            while poly.last().is_some_and(Zero::is_zero) {
                poly.pop();
            }
            if !poly.is_empty() {
                terms.push((poly, rate));
            }
        }
        Self { terms }
    }

    pub fn terms(&self) -> &[(Vec<Rational>, Rational)] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(poly, rate)| {
                let p = poly.iter().rev().fold(0.0, |acc, c| acc * t + rational::to_f64(c));
                p * (rational::to_f64(rate) * t).exp()
            })
            .sum()
    }

    /// Taylor coefficients at `t = 0` up to and including `order`.
    pub fn taylor(&self, order: usize) -> Vec<Rational> {
        let mut out = vec![rational::zero(); order + 1];
        for (poly, rate) in &self.terms {
            // e^{ρt} = Σ_m ρ^m t^m / m!
            let mut exp = vec![rational::one(); order + 1];
            for m in 1..=order {
                exp[m] = &exp[m - 1] * rate / rational::int(m as i64);
            }
            for (k, c) in poly.iter().enumerate().take(order + 1) {
                for m in 0..=order - k {
                    out[k + m] += c * &exp[m];
                }
            }
        }
        out
    }
}

fn render_monomial(c: &Rational, k: usize, first: bool) -> String {
    let sign = if c.is_negative() {
        if first { "-" } else { " - " }
    } else if first {
        ""
    } else {
        " + "
    };
    let a = c.abs();
    let var = match k {
        0 => String::new(),
        1 => "t".to_string(),
        _ => format!("t^{k}"),
    };
    let body = if k == 0 {
        render(&a)
    } else if a.is_one() {
        var
    } else {
        format!("{}*{var}", render(&a))
    };
    format!("{sign}{body}")
}

fn render_poly(poly: &[Rational]) -> (String, usize) {
    let mut s = String::new();
    let mut count = 0;
    for (k, c) in poly.iter().enumerate() {
        if !c.is_zero() {
            s.push_str(&render_monomial(c, k, count == 0));
            count += 1;
        }
    }
    (s, count)
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(poly, rate)| {
                let (p, count) = render_poly(poly);
                if rate.is_zero() {
                    return p;
                }
                let e = if rate.abs().is_one() {
                    format!("exp({}t)", if rate.is_negative() { "-" } else { "" })
                } else {
                    format!("exp({}*t)", render(rate))
                };
                if p == "1" {
                    e
                } else if count > 1 {
                    format!("({p}) * {e}")
                } else {
                    format!("{p} * {e}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// φ(U(t)^n) for the free unitary Brownian motion:
/// `Σ_{k<n} (−1)^k t^k/k! · n^{k−1} C(n, k+1) · e^{−nt/2}`; `n = 0` gives 1.
pub fn ubm_moment(n: u64) -> ExpPoly {
    if n == 0 {
        return ExpPoly::new(vec![(vec![rational::one()], rational::zero())]);
    }
    let nn = BigInt::from(n);
    let poly: Vec<Rational> = (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            // n^{k−1} = n^k / n
            let num = sign * num_traits::pow(nn.clone(), k as usize) * binomial(n, k + 1);
            Rational::new(num, nn.clone() * factorial(k))
        })
        .collect();
    ExpPoly::new(vec![(poly, Rational::new(-nn, BigInt::from(2)))])
}

/// Floating evaluation of [`ubm_moment`].
pub fn ubm_eval(n: u64, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("t must be a finite nonnegative number, got {t}")));
    }
    Ok(ubm_moment(n).eval(t))
}

/// One factor of a product fed to the semicircular replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Letter(Letter),
    /// `U_side(t)^alpha` with `alpha = ±1`.
    Unitary { side: Side, alpha: i8 },
}

/// Order-t expansion engine: the family plus an adjoined all-ones
/// semicircular pair, with a memoized bi-free product over both.
#[derive(Debug, Clone)]
pub struct Liberator {
    base: JointDistribution,
    extended: JointDistribution,
    s_left: Letter,
    s_right: Letter,
}

impl Liberator {
    pub fn new(family: &Family) -> Result<Self> {
        let mut k = 0usize;
        let semicircular = loop {
            let id = PairId::new(&if k == 0 { "lib.s".to_string() } else { format!("lib.s{k}") });
            let cand = standard_semicircular_pair(&id);
            let clash = family.pure(&id).is_ok() || cand.letters().any(|l| family.letter(l.symbol.as_str()).is_ok());
            if !clash {
                break cand;
            }
            k += 1;
        };
        let s_left = semicircular.left_letters()[0].clone();
        let s_right = semicircular.right_letters()[0].clone();
        let mut extended = family.clone();
        extended.push(semicircular)?;
        Ok(Self {
            base: JointDistribution::bifree_product(family.clone()),
            extended: JointDistribution::bifree_product(extended),
            s_left,
            s_right,
        })
    }

    /// The bi-free product of the original family.
    pub fn product(&self) -> &JointDistribution {
        &self.base
    }

    /// `(c0, c1)` with `φ(∏ factors) = c0 + c1·t + O(t²)` after replacing
    /// each `U^α` by `(1 − t/2) + iψ√t S`, `ψ = α` on the left and `−α` on
    /// the right.
    pub fn expand_factors(&self, factors: &[Factor]) -> Result<(Rational, Rational)> {
        let mut units = Vec::new();
        let mut plain = Vec::new();
        for (k, f) in factors.iter().enumerate() {
            match f {
                Factor::Letter(l) => plain.push(l.clone()),
                Factor::Unitary { side, alpha } => {
                    if alpha.abs() != 1 {
                        return Err(Error::Domain(format!("unitary power must be ±1, got {alpha}")));
                    }
                    let psi = if *side == Side::Left { *alpha } else { -*alpha };
                    units.push((k, *side, psi));
                }
            }
        }
        let c0 = self.base.moment(&Word(plain))?;
        let mut c1 = -rational::ratio(units.len() as i64, 2) * &c0;
        for (a, &(p, side_p, psi_p)) in units.iter().enumerate() {
            for &(q, side_q, psi_q) in &units[a + 1..] {
                let word: Word = factors
                    .iter()
                    .enumerate()
                    .filter_map(|(k, f)| match f {
                        Factor::Letter(l) => Some(l.clone()),
                        Factor::Unitary { .. } if k == p => Some(self.s_letter(side_p)),
                        Factor::Unitary { .. } if k == q => Some(self.s_letter(side_q)),
                        Factor::Unitary { .. } => None,
                    })
                    .collect();
                // (i ψ_p)(i ψ_q) = −ψ_p ψ_q
                let weight = -i64::from(psi_p) * i64::from(psi_q);
                c1 += rational::int(weight) * self.extended.moment(&word)?;
            }
        }
        Ok((c0, c1))
    }

    fn s_letter(&self, side: Side) -> Letter {
        match side {
            Side::Left => self.s_left.clone(),
            Side::Right => self.s_right.clone(),
        }
    }

    /// Conjugates each ι-letter `x` as `U x U*` on its own side and expands.
    pub fn expand(&self, w: &Word, iota: &PairId) -> Result<(Rational, Rational)> {
        let mut factors = Vec::with_capacity(w.len() * 3);
        for l in w.letters() {
            if &l.pair == iota {
                factors.push(Factor::Unitary { side: l.side, alpha: 1 });
                factors.push(Factor::Letter(l.clone()));
                factors.push(Factor::Unitary { side: l.side, alpha: -1 });
            } else {
                factors.push(Factor::Letter(l.clone()));
            }
        }
        self.expand_factors(&factors)
    }

    pub fn check(&self, w: &Word, iota: &PairId) -> Result<LiberationReport> {
        let (c0, c1) = self.expand(w, iota)?;
        let phi = self.base.moment(w)?;
        let taur_value = eval_tensor(&self.base, &taur(w, iota))?;
        Ok(LiberationReport { c0, c1, phi, taur_value })
    }
}

/// Both sides of the order-t liberation identity for one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiberationReport {
    pub c0: Rational,
    pub c1: Rational,
    pub phi: Rational,
    pub taur_value: Rational,
}

impl LiberationReport {
    pub fn matches(&self) -> bool {
        self.c0 == self.phi && self.c1 == self.taur_value
    }
}

impl fmt::Display for LiberationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "c0={}, c1={}, taur={}, {}",
            render(&self.c0),
            render(&self.c1),
            render(&self.taur_value),
            if self.matches() { "MATCH" } else { "MISMATCH" }
        )
    }
}

/// `(c0, c1)` of `φ(z_1(t)⋯z_n(t))` where the ι-letters are conjugated by a
/// bi-free unitary Brownian motion.
pub fn replacement_expand(family: &Family, w: &Word, iota: &PairId) -> Result<(Rational, Rational)> {
    Liberator::new(family)?.expand(w, iota)
}

/// True iff `c0 = φ(w)` and `c1 = (φ⊗φ)(ⵣ_ι w)` on the bi-free product.
pub fn liberation_derivative_check(family: &Family, w: &Word, iota: &PairId) -> Result<bool> {
    Ok(Liberator::new(family)?.check(w, iota)?.matches())
}
