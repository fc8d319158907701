//! Acceptance suite: twelve criteria, one PASS/FAIL line each. Runs as a
//! plain binary so the lines are always shown.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use bifree::bnc::{
    classify_blocks, is_bi_non_crossing, maximal_mono_intervals, s_chi_permutation, BlockKind, BncPartition,
    ChiMap, EpsMap, PairId, Side,
};
use bifree::cumulants::{kappa, kappa_via_mobius, moments_from_cumulants};
use bifree::liberation::{eval_tensor, one_per_face, taur, taur_test, ubm_eval, ubm_moment, Factor, Liberator};
use bifree::ncp::{
    all_words, evaluate_theta, random, standard_semicircular_pair, subword, Family, JointDistribution, Letter, MomentOracle,
    PureDistribution, ScalarWordSum, Word,
};
use bifree::partitions::SetPartition;
use bifree::rational::{int, ratio};
use bifree::vaccine::{centred_shifts, vaccine_test, Reconstructor};
use bifree::Rational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pid(s: &str) -> PairId {
    PairId::new(s)
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Two pairs `a` and `b` with `gens` generators on each face.
fn family_with(rng: &mut ChaCha8Rng, gens: [usize; 4], max_degree: usize) -> Family {
    let (al, ar, bl, br) = (names("al", gens[0]), names("ar", gens[1]), names("bl", gens[2]), names("br", gens[3]));
    let a = random::random_pure(&pid("a"), &refs(&al), &refs(&ar), max_degree, rng);
    let b = random::random_pure(&pid("b"), &refs(&bl), &refs(&br), max_degree, rng);
    Family::new(vec![a, b]).unwrap()
}

fn random_family(seed: u64, max_degree: usize) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = [rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=2)];
    family_with(&mut rng, gens, max_degree)
}

fn single_family(seed: u64, max_degree: usize) -> Family {
    family_with(&mut ChaCha8Rng::seed_from_u64(seed), [1, 1, 1, 1], max_degree)
}

fn mixed_words(letters: &[Letter], max_len: usize) -> Vec<Word> {
    all_words(letters, 2, max_len).into_iter().filter(|w| !w.is_pure()).collect()
}

fn c1_eight_letter_chi() -> Check {
    let chi = ChiMap::from_left_set(8, &[2, 3, 4, 7]).map_err(|e| e.to_string())?;
    let order = s_chi_permutation(&chi);
    ensure(order == [2, 3, 4, 7, 8, 6, 5, 1], || format!("s_chi = {order:?}"))?;
    let pi: SetPartition = "1|2 5 7|3 4|6 8".parse().map_err(|e: bifree::Error| e.to_string())?;
    ensure(is_bi_non_crossing(&pi, &chi).unwrap(), || "partition not in BNC(chi)".into())?;
    let all_left = ChiMap::all_left(8).unwrap();
    ensure(!is_bi_non_crossing(&pi, &all_left).unwrap(), || "partition is non-crossing in the usual sense".into())?;
    let colors = (1..=8).map(|i| pid(if [3, 5, 6].contains(&i) { "1" } else { "0" })).collect();
    let intervals = maximal_mono_intervals(&chi, &EpsMap::new(colors).unwrap()).unwrap();
    ensure(intervals.iter().any(|iv| iv.indices == [4, 7, 8]), || "{4,7,8} missing".into())?;
    let kinds = classify_blocks(&BncPartition::new(pi, chi).unwrap());
    let expected = [
        (vec![1], BlockKind::Outer),
        (vec![2, 5, 7], BlockKind::Outer),
        (vec![3, 4], BlockKind::Inner),
        (vec![6, 8], BlockKind::Inner),
    ];
    for (block, kind) in expected {
        ensure(kinds.contains(&(block.clone(), kind)), || format!("block {block:?} should be {kind:?}: {kinds:?}"))?;
    }
    ensure(kinds.len() == 4, || "extra blocks".into())
}

fn c2_ten_letter_intervals() -> Check {
    let chi = ChiMap::from_left_set(10, &[2, 5, 6, 7, 8]).unwrap();
    let colors = (1..=10).map(|i| pid(if [4, 6, 7].contains(&i) { "1" } else { "0" })).collect();
    let mut got: Vec<Vec<usize>> =
        maximal_mono_intervals(&chi, &EpsMap::new(colors).unwrap()).unwrap().into_iter().map(|iv| iv.indices).collect();
    got.sort();
    let mut want = vec![vec![2, 5], vec![6, 7], vec![8, 9, 10], vec![4], vec![1, 3]];
    want.sort();
    ensure(got == want, || format!("intervals {got:?}"))
}

fn c3_section_four_example() -> Check {
    for seed in 0..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p0 = random::random_pure(&pid("p0"), &["x"], &["w"], 4, &mut rng);
        let p1 = random::random_pure(&pid("p1"), &["y"], &["z"], 4, &mut rng);
        let pures = [p0.clone(), p1.clone()];
        let pm = |p: usize, s: &str| {
            let w: Word = s.split_whitespace().map(|x| pures[p].letter(x).unwrap()).collect();
            pures[p].moment(&w).unwrap()
        };
        let d = JointDistribution::bifree_product(Family::new(vec![p0, p1]).unwrap());
        let m = |s: &str| d.moment(&d.parse_word(s).unwrap()).unwrap();
        let xyzw = pm(0, "x w") * pm(1, "y") * pm(1, "z") + pm(0, "x") * pm(0, "w") * pm(1, "y z")
            - pm(0, "x") * pm(0, "w") * pm(1, "y") * pm(1, "z");
        ensure(m("x y z w") == xyzw, || format!("seed {seed}: xyzw"))?;
        ensure(m("w x y z") == pm(0, "w x") * pm(1, "y z"), || format!("seed {seed}: wxyz"))?;
    }
    let fam = Family::new(vec![standard_semicircular_pair(&pid("p0")), standard_semicircular_pair(&pid("p1"))]).unwrap();
    let d = JointDistribution::bifree_product(fam);
    let m = |s: &str| d.moment(&d.parse_word(s).unwrap()).unwrap();
    ensure(m("p0_sl p1_sl p1_sr p0_sr") == int(0), || "semicircular xyzw".into())?;
    ensure(m("p0_sr p0_sl p1_sl p1_sr") == int(1), || "semicircular wxyz".into())
}

fn c4_ten_letter_taur() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p0 = random::random_pure(&pid("p0"), &["x"], &["y"], 2, &mut rng);
    let p1 = random::random_pure(&pid("p1"), &["u"], &["v"], 2, &mut rng);
    let f = Family::new(vec![p0, p1]).unwrap();
    // lefts {2,5,6,7,8}; pair p1 at {4,6,7}
    let symbols = ["y", "x", "y", "v", "x", "u", "u", "x", "y", "y"];
    let w = f.parse_word(&symbols.join(" ")).unwrap();
    let t = taur(&w, &pid("p1"));
    let comp = |ix: &[usize]| -> Vec<usize> { (1..=10).filter(|i| !ix.contains(i)).collect() };
    let split = |right: &[usize]| (subword(&w, &comp(right)).unwrap(), subword(&w, right).unwrap());
    let expected: Vec<(&[usize], i64)> = vec![
        (&[], -2),
        (&[6, 7], 1),
        (&[6, 7, 8, 9, 10], -1),
        (&[4, 6, 7, 8, 9, 10], 1),
        (&[8, 9, 10], 1),
        (&[4, 8, 9, 10], -1),
        (&[4], 1),
    ];
    ensure(t.len() == expected.len(), || format!("{} distinct terms:\n{t}", t.len()))?;
    let mut weight = 0;
    for (right, c) in expected {
        let (l, r) = split(right);
        ensure(t.coefficient(&l, &r) == int(c), || format!("term [{l}] ⊗ [{r}] should have coefficient {c}:\n{t}"))?;
        weight += c.abs();
    }
    ensure(weight == 8, || "eight terms with multiplicity".into())
}

fn c5_roundtrip() -> Check {
    let (p, q) = (pid("p"), pid("q"));
    let letters = vec![Letter::new("x", &p, Side::Left), Letter::new("y", &p, Side::Right), Letter::new("u", &q, Side::Left)];
    let words = all_words(&letters, 1, 6);
    for seed in 0..10 {
        let d = random::random_joint_table(&letters, 6, false, &mut ChaCha8Rng::seed_from_u64(100 + seed));
        let kc = |b: &Word| kappa(&d, b);
        for w in &words {
            let k = kappa(&d, w).map_err(|e| e.to_string())?;
            ensure(k == kappa_via_mobius(&d, w).unwrap(), || format!("seed {seed}: routes differ on {w}"))?;
            ensure(moments_from_cumulants(&kc, w).unwrap() == d.moment(w).unwrap(), || format!("seed {seed}: roundtrip fails on {w}"))?;
        }
    }
    Ok(())
}

fn c6_equivalence() -> Check {
    for seed in 0..5 {
        let f = random_family(200 + seed, 6);
        let d = JointDistribution::bifree_product(f.clone());
        let letters = d.letters();
        for w in mixed_words(&letters, 5) {
            let k = kappa(&d, &w).map_err(|e| e.to_string())?;
            ensure(k.is_zero(), || format!("seed {seed}: mixed cumulant of {w} is {k}"))?;
        }
        let v = vaccine_test(&d, &letters, 6, 120, seed).map_err(|e| e.to_string())?;
        ensure(v.holds(), || format!("seed {seed}: {v}"))?;
        for iota in ["a", "b"] {
            let v = taur_test(&d, &letters, &pid(iota), 5).map_err(|e| e.to_string())?;
            ensure(v.holds() && v.certified, || format!("seed {seed}, ι={iota}: {v}"))?;
        }
    }
    Ok(())
}

fn c7_detection() -> Check {
    for (seed, text) in [(0u64, "al1 bl1"), (1, "ar1 bl1 al1")] {
        let f = single_family(300 + seed, 4);
        let w = f.parse_word(text).unwrap();
        let d = JointDistribution::perturbed(f, BTreeMap::from([(w.clone(), int(1))])).unwrap();
        let letters = d.letters();
        let k = kappa(&d, &w).map_err(|e| e.to_string())?;
        ensure(!k.is_zero(), || format!("mixed cumulant of {w} vanishes"))?;
        let v = vaccine_test(&d, &letters, w.len(), 1000, seed).map_err(|e| e.to_string())?;
        ensure(!v.holds(), || format!("vaccine missed {w}: {v}"))?;
        let iota = w.letters()[1].pair.clone();
        let v = taur_test(&d, &one_per_face(&letters), &iota, w.len()).map_err(|e| e.to_string())?;
        ensure(!v.holds(), || format!("taur missed {w}: {v}"))?;
        let value = eval_tensor(&d, &taur(&w, &iota)).unwrap();
        ensure(!value.is_zero(), || format!("(φ⊗φ)∘ⵣ vanishes on {w}"))?;
    }
    Ok(())
}

fn c8_reconstruction() -> Check {
    let f = single_family(400, 6);
    let d = JointDistribution::bifree_product(f.clone());
    let words = mixed_words(&d.letters(), 6);
    for seed in 0..3 {
        let mut r = Reconstructor::new(&f, seed);
        for w in &words {
            let v = r.moment(w).map_err(|e| e.to_string())?;
            ensure(v == d.moment(w).unwrap(), || format!("seed {seed}: reconstruction differs on {w}"))?;
        }
    }
    Ok(())
}

fn c9_conditional() -> Check {
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let f = family_with(&mut rng, [1, 1, 1, 1], 5);
        let pures: Vec<PureDistribution> = f.pures().map(|p| random::with_random_theta(p.clone(), &mut rng)).collect();
        let d = JointDistribution::conditional_product(Family::new(pures).unwrap()).unwrap();
        for w in all_words(&d.letters(), 1, 5) {
            let inst = centred_shifts(&d, &w, seed).map_err(|e| e.to_string())?;
            let lhs = evaluate_theta(&d, &inst.expansion().unwrap()).map_err(|e| e.to_string())?;
            let mut rhs = int(1);
            for iv in &inst.intervals {
                let shifts: Vec<Rational> = iv.indices.iter().map(|&i| inst.shifts[i - 1].clone()).collect();
                let part = ScalarWordSum::shifted_product(&subword(&w, &iv.indices).unwrap(), &shifts).unwrap();
                rhs *= evaluate_theta(&d, &part).unwrap();
            }
            ensure(lhs == rhs, || format!("seed {seed}: θ does not factor on {w}"))?;
        }
    }
    Ok(())
}

fn c10_liberation() -> Check {
    for seed in 0..5 {
        let f = random_family(600 + seed, 5);
        let lib = Liberator::new(&f).map_err(|e| e.to_string())?;
        let letters = one_per_face(&lib.product().letters());
        for w in mixed_words(&letters, 5) {
            for iota in ["a", "b"] {
                let r = lib.check(&w, &pid(iota)).map_err(|e| e.to_string())?;
                ensure(r.matches(), || format!("seed {seed}, {w}, ι={iota}: {r}"))?;
            }
        }
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE)
}

fn c11_ubm() -> Check {
    let one = ubm_moment(1);
    ensure(one.terms() == [(vec![int(1)], ratio(-1, 2))], || format!("ubm_moment(1) = {one}"))?;
    ensure(close(ubm_eval(1, 1.0).unwrap(), (-0.5f64).exp()), || "ubm_eval(1, 1)".into())?;
    for n in 0..=8 {
        ensure(close(ubm_eval(n, 0.0).unwrap(), 1.0), || format!("ubm_eval({n}, 0)"))?;
    }
    for n in 1..=8 {
        let v = ubm_eval(n, 50.0).unwrap();
        ensure(v.abs() < 1e-9, || format!("ubm_eval({n}, 50) = {v}"))?;
    }
    let lib = Liberator::new(&single_family(700, 2)).unwrap();
    for n in 1..=6u64 {
        let series = ubm_moment(n).taylor(1);
        let nn = n as i64;
        let c1 = ratio(-nn, 2) - int(nn * (nn - 1) / 2);
        ensure(series == [int(1), c1.clone()], || format!("order-t series of ubm_moment({n}): {series:?}"))?;
        for side in [Side::Left, Side::Right] {
            let (a, b) = lib.expand_factors(&vec![Factor::Unitary { side, alpha: 1 }; n as usize]).unwrap();
            ensure(a == int(1) && b == c1, || format!("replacement with {n} unit letters: ({a}, {b})"))?;
        }
    }
    Ok(())
}

fn c12_classical_unitary() -> Check {
    for seed in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let a = random::random_pure(&pid("A"), &["X"], &["Y"], 2, &mut rng);
        let b_id = pid("B");
        for s in [int(0), ratio(1, 2), int(1)] {
            let v = Letter::new("v", &b_id, Side::Right);
            let vs = Letter::new("v*", &b_id, Side::Right);
            let entry = |l: &[&Letter], x: Rational| (Word(l.iter().map(|&c| c.clone()).collect()), x);
            let table: HashMap<Word, Rational> = [
                entry(&[&v], s.clone()),
                entry(&[&vs], s.clone()),
                entry(&[&v, &vs], int(1)),
                entry(&[&vs, &v], int(1)),
                entry(&[&v, &v], &s * &s),
                entry(&[&vs, &vs], &s * &s),
            ]
            .into_iter()
            .collect();
            let b = PureDistribution::from_moments(&b_id, &[], &["v", "v*"], 2, table).unwrap();
            let d = JointDistribution::bifree_product(Family::new(vec![a.clone(), b]).unwrap());
            let m = |t: &str| d.moment(&d.parse_word(t).unwrap()).unwrap();
            let s2 = &s * &s;
            let expected = m("X Y") * &s2 + m("X") * m("Y") * (int(1) - &s2);
            ensure(m("X v Y v*") == expected, || format!("seed {seed}, s = {s}"))?;
        }
    }
    Ok(())
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("eight-letter order, membership, interval, inner/outer", c1_eight_letter_chi),
        ("ten-letter maximal intervals", c2_ten_letter_intervals),
        ("bi-free product identities for xyzw and wxyz", c3_section_four_example),
        ("ten-letter taur terms", c4_ten_letter_taur),
        ("moment/cumulant roundtrip and Möbius route, |w| <= 6", c5_roundtrip),
        ("cumulants, vaccine and taur agree on bi-free products", c6_equivalence),
        ("single perturbation detected by all three methods", c7_detection),
        ("vaccine reconstruction equals bi-free product, |w| <= 6", c8_reconstruction),
        ("conditional theta factorizes over centred intervals", c9_conditional),
        ("liberation derivative equals (φ⊗φ)∘ⵣ, |w| <= 5", c10_liberation),
        ("free unitary Brownian motion moments", c11_ubm),
        ("classical/unitary derivative formula", c12_classical_unitary),
    ];
    let start = Instant::now();
    let results: Vec<(Check, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                let f = *f;
                scope.spawn(move || {
                    let t = Instant::now();
                    let r = f();
                    (r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| (Err("panicked".to_string()), 0.0)))
            .collect()
    });
    let mut failed = 0;
    for (k, ((name, _), (r, secs))) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.2}s", criteria.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
