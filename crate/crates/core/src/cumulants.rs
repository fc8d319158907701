//! Moment/cumulant transforms over bi-non-crossing partitions, the bi-free
//! product of a family of pairs, and the conditional (θ, φ) layer.

use num_traits::Zero;

use crate::bnc::{block_kinds, bnc_below, bnc_set_partitions, mobius_to_full, BlockKind, BncPartition};
use crate::memo::Memo;
use crate::ncp::{chi_of, Family, MomentOracle, PureDistribution, Word};
use crate::partitions::SetPartition;
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Memoized κ and 𝒦 values of one oracle, keyed by word.
#[derive(Debug, Clone, Default)]
pub struct CumulantCache {
    kappa: Memo<Word, Rational>,
    conditional: Memo<Word, Rational>,
}

impl CumulantCache {
    pub fn len(&self) -> usize {
        self.kappa.len() + self.conditional.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn nonempty(w: &Word) -> Result<()> {
    if w.is_empty() {
        Err(Error::Size("cumulants are defined for words of length at least 1".into()))
    } else {
        Ok(())
    }
}

/// ∏ over blocks of `f(w_B)`, short-circuiting on a zero factor.
fn block_product(
    p: &SetPartition,
    w: &Word,
    mut f: impl FnMut(usize, &Word) -> Result<Rational>,
) -> Result<Rational> {
    let mut prod = rational::one();
    for (label, block) in p.blocks().iter().enumerate() {
        let v = f(label, &w.pick(block))?;
        if v.is_zero() {
            return Ok(rational::zero());
        }
        prod *= v;
    }
    Ok(prod)
}

/// φ_π(w) = ∏_B φ(w_B).
pub fn phi_pi<O: MomentOracle + ?Sized>(d: &O, p: &BncPartition, w: &Word) -> Result<Rational> {
    if w.len() != p.partition().n() {
        return Err(Error::Size(format!("word of length {} against a partition of {}", w.len(), p.partition().n())));
    }
    if &chi_of(w) != p.chi() {
        return Err(Error::ChiMismatch(format!("word sides {} differ from partition sides {}", chi_of(w), p.chi())));
    }
    block_product(p.partition(), w, |_, b| d.moment(b))
}

/// Bi-free cumulant κ_χ(w) by the subtraction recursion.
pub fn kappa<O: MomentOracle + ?Sized>(d: &O, w: &Word) -> Result<Rational> {
    nonempty(w)?;
    match d.cumulant_cache() {
        Some(cache) => kappa_rec(d, w, &cache.kappa),
        None => kappa_rec(d, w, &Memo::default()),
    }
}

fn kappa_rec<O: MomentOracle + ?Sized>(d: &O, w: &Word, memo: &Memo<Word, Rational>) -> Result<Rational> {
    memo.get_or_try_insert(w, || {
        let mut total = d.moment(w)?;
        for p in bnc_set_partitions(&chi_of(w))?.iter() {
            if !p.is_full() {
                total -= block_product(p, w, |_, b| kappa_rec(d, b, memo))?;
            }
        }
        Ok(total)
    })
}

/// κ_χ(w) = Σ_π μ(π, 1_χ) φ_π(w).
pub fn kappa_via_mobius<O: MomentOracle + ?Sized>(d: &O, w: &Word) -> Result<Rational> {
    nonempty(w)?;
    let mut total = rational::zero();
    for (p, mu) in mobius_to_full(&chi_of(w))?.iter() {
        if *mu != 0 {
            total += rational::int(*mu) * block_product(p, w, |_, b| d.moment(b))?;
        }
    }
    Ok(total)
}

/// φ(w) = Σ_{π ∈ BNC(χ)} ∏_B κ(w_B) for a cumulant oracle `kc`.
pub fn moments_from_cumulants(kc: &dyn Fn(&Word) -> Result<Rational>, w: &Word) -> Result<Rational> {
    if w.is_empty() {
        return Ok(rational::one());
    }
    let mut total = rational::zero();
    for p in bnc_set_partitions(&chi_of(w))?.iter() {
        total += block_product(p, w, |_, b| kc(b))?;
    }
    Ok(total)
}

fn pures_of<'a>(family: &'a Family, w: &Word) -> Result<Vec<&'a PureDistribution>> {
    w.letters().iter().map(|l| family.pure(&l.pair)).collect()
}

/// Mixed moment of the bi-free product: only ε-monochromatic partitions
/// contribute, each block weighted by its own pair's cumulant.
pub fn bifree_product_moment(family: &Family, w: &Word) -> Result<Rational> {
    if w.is_empty() {
        return Ok(rational::one());
    }
    let pures = pures_of(family, w)?;
    if w.is_pure() {
        return pures[0].moment(w);
    }
    let colors: Vec<_> = w.letters().iter().map(|l| &l.pair).collect();
    let mut total = rational::zero();
    for p in bnc_below(&chi_of(w), &colors)? {
        total += block_product(&p, w, |_, b| family.pure(&b.letter(1).pair)?.cumulant(b))?;
    }
    Ok(total)
}

/// Conditional cumulant 𝒦_χ(w) from the θ-layer: inner blocks weigh κ,
/// outer blocks weigh 𝒦.
pub fn conditional_kappa<O: MomentOracle + ?Sized>(d: &O, w: &Word) -> Result<Rational> {
    nonempty(w)?;
    match d.cumulant_cache() {
        Some(cache) => conditional_rec(d, w, &cache.conditional),
        None => conditional_rec(d, w, &Memo::default()),
    }
}

fn conditional_rec<O: MomentOracle + ?Sized>(d: &O, w: &Word, memo: &Memo<Word, Rational>) -> Result<Rational> {
    memo.get_or_try_insert(w, || {
        let chi = chi_of(w);
        let mut total = d.theta(w)?;
        for p in bnc_set_partitions(&chi)?.iter() {
            if p.is_full() {
                continue;
            }
            let kinds = block_kinds(p, &chi);
            total -= block_product(p, w, |label, b| match kinds[label] {
                BlockKind::Inner => kappa(d, b),
                BlockKind::Outer => conditional_rec(d, b, memo),
            })?;
        }
        Ok(total)
    })
}

/// Mixed θ-moment of the conditionally bi-free product.
pub fn conditional_product_theta(family: &Family, w: &Word) -> Result<Rational> {
    if w.is_empty() {
        return Ok(rational::one());
    }
    let pures = pures_of(family, w)?;
    if w.is_pure() {
        return pures[0].theta(w);
    }
    let chi = chi_of(w);
    let colors: Vec<_> = w.letters().iter().map(|l| &l.pair).collect();
    let mut total = rational::zero();
    for p in bnc_below(&chi, &colors)? {
        let kinds = block_kinds(&p, &chi);
        total += block_product(&p, w, |label, b| {
            let pure = family.pure(&b.letter(1).pair)?;
            match kinds[label] {
                BlockKind::Inner => pure.cumulant(b),
                BlockKind::Outer => pure.conditional_cumulant(b),
            }
        })?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnc::{ChiMap, PairId, Side};
    use crate::ncp::{all_words, random, standard_semicircular_pair, JointDistribution, Letter};
    use crate::rational::{int, ratio};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn pid(s: &str) -> PairId {
        PairId::new(s)
    }

    fn two_pairs(seed: u64, max_degree: usize) -> Family {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::random_pure(&pid("a"), &["a1"], &["a2"], max_degree, &mut rng);
        let b = random::random_pure(&pid("b"), &["b1"], &["b2"], max_degree, &mut rng);
        Family::new(vec![a, b]).unwrap()
    }

    fn theta_pairs(seed: u64, max_degree: usize) -> Family {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::random_pure(&pid("a"), &["a1"], &["a2"], max_degree, &mut rng);
        let b = random::random_pure(&pid("b"), &["b1"], &["b2"], max_degree, &mut rng);
        let a = random::with_random_theta(a, &mut rng);
        let b = random::with_random_theta(b, &mut rng);
        Family::new(vec![a, b]).unwrap()
    }

    #[test]
    fn phi_pi_full_and_discrete() {
        let d = JointDistribution::bifree_product(two_pairs(3, 4));
        let w = d.parse_word("a1 b2 a2").unwrap();
        let chi = chi_of(&w);
        let full = BncPartition::full(&chi);
        assert_eq!(phi_pi(&d, &full, &w).unwrap(), d.moment(&w).unwrap());
        let disc = BncPartition::discrete(&chi);
        let expected: Rational = w.letters().iter().map(|l| d.moment(&Word(vec![l.clone()])).unwrap()).product();
        assert_eq!(phi_pi(&d, &disc, &w).unwrap(), expected);
        let wrong = BncPartition::full(&ChiMap::all_left(3).unwrap());
        assert!(matches!(phi_pi(&d, &wrong, &w), Err(Error::ChiMismatch(_))));
    }

    #[test]
    fn phi_pi_odd_block_vanishes() {
        let s = standard_semicircular_pair(&pid("s"));
        let l = s.letter("s_sl").unwrap();
        let r = s.letter("s_sr").unwrap();
        let lefts = [2, 3, 4, 7];
        let w: Word = (1..=8).map(|i| if lefts.contains(&i) { l.clone() } else { r.clone() }).collect();
        let chi = ChiMap::from_left_set(8, &lefts).unwrap();
        let p = SetPartition::from_blocks(8, &[vec![2, 5, 7], vec![1], vec![3, 4], vec![6, 8]]).unwrap();
        let p = BncPartition::new(p, chi).unwrap();
        assert_eq!(phi_pi(&s, &p, &w).unwrap(), int(0));
    }

    #[test]
    fn kappa_small_words() {
        let d = JointDistribution::bifree_product(two_pairs(5, 4));
        let w1 = d.parse_word("a1").unwrap();
        assert_eq!(kappa(&d, &w1).unwrap(), d.moment(&w1).unwrap());
        let w2 = d.parse_word("a1 a2").unwrap();
        let (x, y) = (d.parse_word("a1").unwrap(), d.parse_word("a2").unwrap());
        let expected = d.moment(&w2).unwrap() - d.moment(&x).unwrap() * d.moment(&y).unwrap();
        assert_eq!(kappa(&d, &w2).unwrap(), expected);
        assert_eq!(kappa_via_mobius(&d, &w2).unwrap(), expected);
        assert!(kappa(&d, &Word::empty()).is_err());
    }

    #[test]
    fn semicircular_fourth_cumulant_vanishes() {
        let s = standard_semicircular_pair(&pid("s"));
        let w = Word(
            ["s_sl", "s_sl", "s_sr", "s_sr"].iter().map(|n| s.letter(n).unwrap()).collect(),
        );
        assert_eq!(kappa(&s, &w).unwrap(), int(0));
        assert_eq!(kappa_via_mobius(&s, &w).unwrap(), int(0));
        let kc = |b: &Word| s.cumulant(b);
        assert_eq!(moments_from_cumulants(&kc, &w).unwrap(), int(2));
        assert_eq!(moments_from_cumulants(&kc, &Word::empty()).unwrap(), int(1));
    }

    #[test]
    fn kappa_routes_agree_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = pid("p");
        let letters = vec![Letter::new("x", &p, Side::Left), Letter::new("y", &p, Side::Right)];
        let d = random::random_joint_table(&letters, 5, false, &mut rng);
        for w in all_words(&letters, 1, 5) {
            let k = kappa(&d, &w).unwrap();
            assert_eq!(k, kappa_via_mobius(&d, &w).unwrap(), "{w}");
            let kc = |b: &Word| kappa(&d, b);
            assert_eq!(moments_from_cumulants(&kc, &w).unwrap(), d.moment(&w).unwrap(), "{w}");
        }
    }

    #[test]
    fn product_two_letters() {
        let d = JointDistribution::bifree_product(two_pairs(2, 3));
        for text in ["a1 b1", "a1 b2", "a2 b1", "b2 a2"] {
            let w = d.parse_word(text).unwrap();
            let expected = d.moment(&w.pick(&[1])).unwrap() * d.moment(&w.pick(&[2])).unwrap();
            assert_eq!(d.moment(&w).unwrap(), expected, "{text}");
        }
    }

    #[test]
    fn product_wxyz_factorizes() {
        // χ = (r, ℓ, ℓ, r), ε = (0, 0, 1, 1)
        let d = JointDistribution::bifree_product(two_pairs(9, 3));
        let w = d.parse_word("a2 a1 b1 b2").unwrap();
        let expected = d.moment(&w.pick(&[1, 2])).unwrap() * d.moment(&w.pick(&[3, 4])).unwrap();
        assert_eq!(d.moment(&w).unwrap(), expected);
    }

    #[test]
    fn product_xyzw_formula() {
        // χ = (ℓ, ℓ, r, r), ε = (0, 1, 1, 0)
        let d = JointDistribution::bifree_product(two_pairs(4, 3));
        let w = d.parse_word("a1 b1 b2 a2").unwrap();
        let m = |ix: &[usize]| d.moment(&w.pick(ix)).unwrap();
        let expected = m(&[1, 4]) * m(&[2]) * m(&[3]) + m(&[1]) * m(&[4]) * m(&[2, 3])
            - m(&[1]) * m(&[4]) * m(&[2]) * m(&[3]);
        assert_eq!(d.moment(&w).unwrap(), expected);

        let fam = Family::new(vec![standard_semicircular_pair(&pid("p0")), standard_semicircular_pair(&pid("p1"))])
            .unwrap();
        let s = JointDistribution::bifree_product(fam);
        let first = s.parse_word("p0_sl p1_sl p1_sr p0_sr").unwrap();
        let second = s.parse_word("p0_sr p0_sl p1_sl p1_sr").unwrap();
        assert_eq!(s.moment(&first).unwrap(), int(0));
        assert_eq!(s.moment(&second).unwrap(), int(1));
    }

    #[test]
    fn insufficient_pure_data() {
        let d = JointDistribution::bifree_product(two_pairs(1, 2));
        let w = d.parse_word("a1 a1 a1 b1").unwrap();
        assert!(matches!(d.moment(&w), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn mixed_cumulants_vanish() {
        let d = JointDistribution::bifree_product(two_pairs(21, 4));
        let alphabet = d.letters();
        for w in all_words(&alphabet, 2, 4) {
            if !w.is_pure() {
                assert_eq!(kappa(&d, &w).unwrap(), int(0), "{w}");
            }
        }
    }

    #[test]
    fn conditional_small_words() {
        let d = JointDistribution::conditional_product(theta_pairs(8, 3)).unwrap();
        let w1 = d.parse_word("a1").unwrap();
        assert_eq!(conditional_kappa(&d, &w1).unwrap(), d.theta(&w1).unwrap());
        let w2 = d.parse_word("a1 a2").unwrap();
        let t = |ix: &[usize]| d.theta(&w2.pick(ix)).unwrap();
        assert_eq!(conditional_kappa(&d, &w2).unwrap(), t(&[1, 2]) - t(&[1]) * t(&[2]));
        let plain = JointDistribution::bifree_product(two_pairs(8, 3));
        assert!(matches!(conditional_kappa(&plain, &w1), Err(Error::Mode(_))));
    }

    #[test]
    fn conditional_inner_singleton_uses_kappa() {
        // all-left z1 z2 z3: θ = Σ over the five partitions; {2} is inner in {{1,3},{2}}
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = pid("p");
        let letters: Vec<Letter> = ["z1", "z2", "z3"].iter().map(|s| Letter::new(s, &p, Side::Left)).collect();
        let d = random::random_joint_table(&letters, 3, true, &mut rng);
        let w = Word(letters.clone());
        let th = |ix: &[usize]| d.theta(&w.pick(ix)).unwrap();
        let ph = |ix: &[usize]| d.moment(&w.pick(ix)).unwrap();
        let k = |ix: &[usize]| conditional_kappa(&d, &w.pick(ix)).unwrap();
        let expected = th(&[1, 2, 3])
            - k(&[1, 2]) * th(&[3])
            - th(&[1]) * k(&[2, 3])
            - k(&[1, 3]) * ph(&[2])
            - th(&[1]) * th(&[2]) * th(&[3]);
        assert_eq!(conditional_kappa(&d, &w).unwrap(), expected);
    }

    #[test]
    fn conditional_product_examples() {
        let fam = theta_pairs(17, 3);
        let d = JointDistribution::conditional_product(fam).unwrap();
        let w = d.parse_word("a1 b1").unwrap();
        let th = |w: &Word, ix: &[usize]| d.theta(&w.pick(ix)).unwrap();
        assert_eq!(d.theta(&w).unwrap(), th(&w, &[1]) * th(&w, &[2]));
        let w = d.parse_word("a1 b1 a1").unwrap();
        let phi_b = d.moment(&w.pick(&[2])).unwrap();
        let expected = th(&w, &[1]) * th(&w, &[2]) * th(&w, &[3])
            + (th(&w, &[1, 3]) - th(&w, &[1]) * th(&w, &[3])) * phi_b;
        assert_eq!(d.theta(&w).unwrap(), expected);
    }

    #[test]
    fn conditional_degenerates_to_bifree() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut pures = Vec::new();
        for (id, l, r) in [("a", "a1", "a2"), ("b", "b1", "b2")] {
            let pure = random::random_pure(&pid(id), &[l], &[r], 4, &mut rng);
            let table: HashMap<Word, Rational> =
                pure.words_up_to(4).into_iter().map(|w| (w.clone(), pure.moment(&w).unwrap())).collect();
            pures.push(pure.with_theta(table).unwrap());
        }
        let d = JointDistribution::conditional_product(Family::new(pures).unwrap()).unwrap();
        for w in all_words(&d.letters(), 1, 4) {
            assert_eq!(d.theta(&w).unwrap(), d.moment(&w).unwrap(), "{w}");
        }
    }

    #[test]
    fn half_covariance_semicircular_moment() {
        let s = crate::ncp::builtin_semicircular_pair(&pid("s"), [int(1), ratio(1, 2), int(1)]);
        let w = Word(["s_sl", "s_sr"].iter().map(|n| s.letter(n).unwrap()).collect());
        assert_eq!(s.moment(&w).unwrap(), ratio(1, 2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn swapping_commuting_letters_keeps_moment(seed in 0u64..1000, len in 2usize..6, pick in 0usize..1000) {
            let d = JointDistribution::bifree_product(two_pairs(seed, 5));
            let alphabet = d.letters();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let w: Word = (0..len).map(|_| alphabet[rand::Rng::gen_range(&mut rng, 0..alphabet.len())].clone()).collect();
            let k = pick % (len - 1);
            let (x, y) = (&w.0[k], &w.0[k + 1]);
            if x.side != y.side && x.pair != y.pair {
                let mut v = w.0.clone();
                v.swap(k, k + 1);
                prop_assert_eq!(d.moment(&w).unwrap(), d.moment(&Word(v)).unwrap());
            }
        }

        #[test]
        fn kappa_matches_mobius_on_random_tables(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = pid("p");
            let q = pid("q");
            let letters = vec![Letter::new("x", &p, Side::Left), Letter::new("y", &q, Side::Right)];
            let d = random::random_joint_table(&letters, 4, false, &mut rng);
            for w in all_words(&letters, 1, 4) {
                prop_assert_eq!(kappa(&d, &w).unwrap(), kappa_via_mobius(&d, &w).unwrap());
            }
        }
    }
}
