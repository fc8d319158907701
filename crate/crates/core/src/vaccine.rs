//! Centring of maximal monochromatic χ-intervals, the vanishing test for
//! alternating centred words, and the moment reconstruction it implies.
//!
//! Shifts are per letter and rational. The moment of a shifted interval is
//! affine in each single shift, so one pivot shift per interval is solved
//! from a linear equation while the others are drawn at random.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bnc::{mono_runs, ChiInterval};
use crate::ncp::{chi_of, evaluate, random::small_rational, Family, Letter, MomentOracle, ScalarWordSum, Word};
use crate::rational::{self, render, Rational};
use crate::{Error, Result};

/// Resampling rounds before an interval is declared degenerate.
pub const MAX_RESAMPLES: usize = 16;

/// A word together with shifts centring every maximal interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentredInstance {
    pub word: Word,
    pub shifts: Vec<Rational>,
    pub intervals: Vec<ChiInterval>,
}

impl CentredInstance {
    /// `(z_1 − c_1)⋯(z_n − c_n)` expanded.
    pub fn expansion(&self) -> Result<ScalarWordSum> {
        ScalarWordSum::shifted_product(&self.word, &self.shifts)
    }
}

/// `E(c) = φ(∏_j (u_j − c_j))` split as `E0 + c_p·E1` for pivot `p`
/// (0-based within `u`).
fn pivot_coefficients<O: MomentOracle + ?Sized>(
    d: &O,
    u: &Word,
    shifts: &[Rational],
    pivot: usize,
) -> Result<(Rational, Rational)> {
    let k = u.len();
    let mut e0 = rational::zero();
    let mut e1 = rational::zero();
    for mask in 0..1u64 << k {
        let mut c = rational::one();
        for (j, s) in shifts.iter().enumerate() {
            if j != pivot && mask >> j & 1 == 0 {
                c *= -s;
            }
        }
        if c.is_zero() {
            continue;
        }
        let m = d.moment(&u.pick_mask(mask))?;
        if mask >> pivot & 1 == 1 {
            e0 += c * m;
        } else {
            e1 -= c * m;
        }
    }
    Ok((e0, e1))
}

/// Solves for the pivot shift that centres `u` given the other shifts.
/// Returns `None` when no value works; when every value works the current
/// pivot shift is kept.
pub fn solve_pivot<O: MomentOracle + ?Sized>(
    d: &O,
    u: &Word,
    shifts: &[Rational],
    pivot: usize,
) -> Result<Option<Rational>> {
    if shifts.len() != u.len() || pivot >= u.len() {
        return Err(Error::Size(format!("{} shifts, pivot {} for a word of length {}", shifts.len(), pivot, u.len())));
    }
    let (e0, e1) = pivot_coefficients(d, u, shifts, pivot)?;
    Ok(if !e1.is_zero() {
        Some(-e0 / e1)
    } else if e0.is_zero() {
        Some(shifts[pivot].clone())
    } else {
        None
    })
}

/// Shifts for one pure word `u` so that `φ(∏(u_j − c_j)) = 0`.
fn centre_interval<O: MomentOracle + ?Sized, R: Rng + ?Sized>(d: &O, u: &Word, rng: &mut R) -> Result<Vec<Rational>> {
    let k = u.len();
    for _ in 0..=MAX_RESAMPLES {
        let mut shifts: Vec<Rational> = (0..k).map(|_| small_rational(rng)).collect();
        for pivot in (0..k).rev() {
            if let Some(c) = solve_pivot(d, u, &shifts, pivot)? {
                shifts[pivot] = c;
                return Ok(shifts);
            }
        }
    }
    Err(Error::DegenerateCentring(format!("`{u}`: no pivot with a nonzero linear coefficient")))
}

fn centre_with<O: MomentOracle + ?Sized, R: Rng + ?Sized>(d: &O, w: &Word, rng: &mut R) -> Result<CentredInstance> {
    let colors: Vec<_> = w.letters().iter().map(|l| &l.pair).collect();
    let intervals = mono_runs(&chi_of(w), &colors);
    let mut shifts = vec![rational::zero(); w.len()];
    for iv in &intervals {
        let local = centre_interval(d, &w.pick(&iv.indices), rng)?;
        for (&i, c) in iv.indices.iter().zip(local) {
            shifts[i - 1] = c;
        }
    }
    Ok(CentredInstance { word: w.clone(), shifts, intervals })
}

/// Per-letter shifts centring each maximal ε-monochromatic χ-interval of
/// `w`. Only moments of single-pair subwords are queried.
pub fn centred_shifts<O: MomentOracle + ?Sized>(d: &O, w: &Word, seed: u64) -> Result<CentredInstance> {
    centre_with(d, w, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Outcome of [`vaccine_test`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds { trials: usize, skipped: usize },
    Counterexample { word: Word, shifts: Vec<Rational>, value: Rational },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { trials, skipped } => write!(f, "HOLDS trials={trials} skipped={skipped}"),
            Verdict::Counterexample { word, shifts, value } => {
                let symbols: Vec<&str> = word.letters().iter().map(|l| l.symbol.as_str()).collect();
                let shifts: Vec<String> = shifts.iter().map(render).collect();
                write!(
                    f,
                    "COUNTEREXAMPLE word={} shifts={} value={}",
                    symbols.join(","),
                    shifts.join(","),
                    render(value)
                )
            }
        }
    }
}

/// Random word with at least two distinct pairs: pair, then side, then
/// generator, each uniform among the available choices.
fn sample_word<R: Rng + ?Sized>(by_pair: &[(Vec<Letter>, Vec<Letter>)], len: usize, rng: &mut R) -> Word {
    loop {
        let w: Word = (0..len)
            .map(|_| {
                let (left, right) = &by_pair[rng.gen_range(0..by_pair.len())];
                let face = match (left.is_empty(), right.is_empty()) {
                    (false, true) => left,
                    (true, false) => right,
                    _ if rng.gen_bool(0.5) => left,
                    _ => right,
                };
                face[rng.gen_range(0..face.len())].clone()
            })
            .collect();
        if !w.is_pure() {
            return w;
        }
    }
}

/// Trial `t` draws from its own ChaCha stream of `seed`, so results do not
/// depend on evaluation order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples centred alternating words and checks that their shifted products
/// have moment zero. Trials whose centring is degenerate are skipped.
pub fn vaccine_test<O: MomentOracle + ?Sized>(
    d: &O,
    letters: &[Letter],
    max_len: usize,
    trials: usize,
    seed: u64,
) -> Result<Verdict> {
    if !(1..=8).contains(&max_len) {
        return Err(Error::Domain(format!("max_len must lie in 1..=8, got {max_len}")));
    }
    let mut by_pair: Vec<(Vec<Letter>, Vec<Letter>)> = Vec::new();
    let mut index: HashMap<_, usize> = HashMap::new();
    for l in letters {
        let k = *index.entry(l.pair.clone()).or_insert_with(|| {
            by_pair.push((Vec::new(), Vec::new()));
            by_pair.len() - 1
        });
        match l.side {
            crate::bnc::Side::Left => by_pair[k].0.push(l.clone()),
            crate::bnc::Side::Right => by_pair[k].1.push(l.clone()),
        }
    }
    if by_pair.len() < 2 || max_len < 2 {
        return Ok(Verdict::Holds { trials: 0, skipped: 0 });
    }
    let mut skipped = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let len = rng.gen_range(2..=max_len);
        let w = sample_word(&by_pair, len, &mut rng);
        let inst = match centre_with(d, &w, &mut rng) {
            Ok(inst) => inst,
            Err(Error::DegenerateCentring(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let value = evaluate(d, &inst.expansion()?)?;
        if !value.is_zero() {
            return Ok(Verdict::Counterexample { word: w, shifts: inst.shifts, value });
        }
    }
    Ok(Verdict::Holds { trials, skipped })
}

/// Mixed moment of the bi-free product recovered from the vanishing
/// property alone: centre `w`, expand, and solve for the top term, recursing
/// on shorter mixed words. Single-pair words come from the pure tables.
pub fn vaccine_reconstruct_moment(family: &Family, w: &Word, seed: u64) -> Result<Rational> {
    Reconstructor::new(family, seed).moment(w)
}

/// Reconstruction state shared across words: one rng stream and the
/// moments solved so far.
#[derive(Debug)]
pub struct Reconstructor<'a> {
    family: &'a Family,
    rng: ChaCha8Rng,
    memo: HashMap<Word, Rational>,
}

impl<'a> Reconstructor<'a> {
    pub fn new(family: &'a Family, seed: u64) -> Self {
        Self { family, rng: ChaCha8Rng::seed_from_u64(seed), memo: HashMap::new() }
    }

    pub fn moment(&mut self, w: &Word) -> Result<Rational> {
        if w.is_empty() {
            return Ok(rational::one());
        }
        if w.is_pure() {
            return self.family.pure(&w.letter(1).pair)?.moment(w);
        }
        if let Some(v) = self.memo.get(w) {
            return Ok(v.clone());
        }
        if w.len() > 63 {
            return Err(Error::Size("word too long to expand".into()));
        }
        let inst = centre_with(self.family, w, &mut self.rng)?;
        let full = (1u64 << w.len()) - 1;
        let mut total = rational::zero();
        for mask in 0..full {
            let mut c = rational::one();
            for (k, s) in inst.shifts.iter().enumerate() {
                if mask >> k & 1 == 0 {
                    c *= -s;
                }
            }
            if !c.is_zero() {
                total -= c * self.moment(&w.pick_mask(mask))?;
            }
        }
        self.memo.insert(w.clone(), total.clone());
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnc::{PairId, Side};
    use crate::ncp::{all_words, random, JointDistribution};
    use crate::rational::int;
    use std::collections::BTreeMap;

    fn pid(s: &str) -> PairId {
        PairId::new(s)
    }

    fn family(seed: u64, max_degree: usize) -> Family {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::random_pure(&pid("a"), &["a1"], &["a2"], max_degree, &mut rng);
        let b = random::random_pure(&pid("b"), &["b1"], &["b2"], max_degree, &mut rng);
        Family::new(vec![a, b]).unwrap()
    }

    #[test]
    fn single_letter_centres_at_mean() {
        let f = family(1, 3);
        let w = f.parse_word("a1").unwrap();
        let inst = centred_shifts(&f, &w, 5).unwrap();
        assert_eq!(inst.shifts, vec![f.moment(&w).unwrap()]);
    }

    #[test]
    fn two_letter_pivot() {
        let f = family(2, 3);
        let u = f.parse_word("a1 a2").unwrap();
        let m = |ix: &[usize]| f.moment(&u.pick(ix)).unwrap();
        if !m(&[1]).is_zero() {
            let c = solve_pivot(&f, &u, &[int(0), int(0)], 1).unwrap().unwrap();
            assert_eq!(c, m(&[1, 2]) / m(&[1]));
        }
    }

    #[test]
    fn degenerate_interval() {
        // φ(1) = 0 makes E independent of the shift; no unital state does this.
        struct Constant;
        impl MomentOracle for Constant {
            fn moment(&self, w: &Word) -> Result<Rational> {
                Ok(if w.is_empty() { int(0) } else { int(1) })
            }
        }
        let p = pid("p");
        let x = Letter::new("x", &p, Side::Left);
        let err = centred_shifts(&Constant, &Word(vec![x]), 0).unwrap_err();
        assert!(matches!(err, Error::DegenerateCentring(_)));
    }

    #[test]
    fn example_word_intervals_centred() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = random::random_pure(&pid("p0"), &["x"], &["y"], 3, &mut rng);
        let b = random::random_pure(&pid("p1"), &["u"], &["v"], 3, &mut rng);
        let f = Family::new(vec![a, b]).unwrap();
        // lefts {2,5,6,7,8}; pair p1 at {4,6,7}
        let w = f.parse_word("y x y v x u u x y y").unwrap();
        let inst = centred_shifts(&f, &w, 3).unwrap();
        let groups: Vec<Vec<usize>> = inst.intervals.iter().map(|iv| iv.indices.clone()).collect();
        assert_eq!(groups, vec![vec![2, 5], vec![6, 7], vec![8, 9, 10], vec![4], vec![1, 3]]);
        for iv in &inst.intervals {
            let u = w.pick(&iv.indices);
            let c: Vec<Rational> = iv.indices.iter().map(|&i| inst.shifts[i - 1].clone()).collect();
            let e = evaluate(&f, &ScalarWordSum::shifted_product(&u, &c).unwrap()).unwrap();
            assert_eq!(e, int(0));
        }
    }

    #[test]
    fn bifree_product_holds() {
        let d = JointDistribution::bifree_product(family(4, 6));
        let v = vaccine_test(&d, &d.letters(), 6, 60, 9).unwrap();
        assert!(v.holds(), "{v}");
        assert!(v.to_string().starts_with("HOLDS trials=60"));
    }

    #[test]
    fn single_pair_is_vacuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::random_pure(&pid("a"), &["a1"], &["a2"], 3, &mut rng);
        let d = JointDistribution::bifree_product(Family::new(vec![a]).unwrap());
        assert_eq!(vaccine_test(&d, &d.letters(), 3, 10, 1).unwrap(), Verdict::Holds { trials: 0, skipped: 0 });
        assert!(vaccine_test(&d, &d.letters(), 9, 10, 1).is_err());
    }

    #[test]
    fn perturbation_is_detected() {
        let f = family(6, 2);
        let w = f.parse_word("a1 b1").unwrap();
        let d = JointDistribution::perturbed(f, BTreeMap::from([(w, int(1))])).unwrap();
        let v = vaccine_test(&d, &d.letters(), 2, 200, 4).unwrap();
        match v {
            Verdict::Counterexample { word, value, .. } => {
                assert_eq!(word.len(), 2);
                assert!(!value.is_zero());
            }
            other => panic!("expected a counterexample, got {other}"),
        }
    }

    #[test]
    fn reconstruction_matches_product() {
        let f = family(10, 4);
        let d = JointDistribution::bifree_product(f.clone());
        for w in all_words(&d.letters(), 1, 4) {
            assert_eq!(vaccine_reconstruct_moment(&f, &w, 1).unwrap(), d.moment(&w).unwrap(), "{w}");
        }
    }

    #[test]
    fn reconstruction_ignores_seed() {
        let f = family(12, 5);
        let w = f.parse_word("a1 b2 a2 b1 a1").unwrap();
        let v0 = vaccine_reconstruct_moment(&f, &w, 0).unwrap();
        for seed in 1..5 {
            assert_eq!(vaccine_reconstruct_moment(&f, &w, seed).unwrap(), v0);
        }
    }

    #[test]
    fn two_letter_reconstruction() {
        let f = family(14, 2);
        let w = f.parse_word("a2 b1").unwrap();
        let expected = f.moment(&w.pick(&[1])).unwrap() * f.moment(&w.pick(&[2])).unwrap();
        assert_eq!(vaccine_reconstruct_moment(&f, &w, 8).unwrap(), expected);
    }
}
