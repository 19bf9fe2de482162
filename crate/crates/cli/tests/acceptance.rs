//! Acceptance suite: one PASS/FAIL line per criterion. All comparisons are
//! exact (rational arithmetic, tolerance 0); time limits are wall clock.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use blinfty::assembler::{enumerate_gluings, ComponentKind, ComponentMap, HatMap, HatP, Operator};
use blinfty::basis::{self, BasisSpec, Truncation};
use blinfty::catalog::{self, Manifest, ManifestEntry};
use blinfty::ibl::{self, GridTorsion, IBLAlgebra};
use blinfty::invariants::{self, Search};
use blinfty::io::{self, GluingDoc, McDoc, ObjectDoc, Ring};
use blinfty::mc;
use blinfty::scalar::{NovikovElem, Rational, Scalar};
use blinfty::space::{Expression, Generator, Letter, Parity, Sentence, Space, Word};
use blinfty::structures::{self as st, Augmentation, BLAlgebra, BLMorphism, PointedMap, PointedMorphism};
use common::*;
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type N = NovikovElem;
type Check = Result<String, String>;

fn q(n: i64) -> Rational {
    Rational::int(n)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../catalog")
}

fn manifest() -> Manifest {
    catalog::load_manifest(&dir()).expect("shipped manifest")
}

fn text(name: &str) -> String {
    std::fs::read_to_string(dir().join(name)).expect("catalog file")
}

fn obj(name: &str) -> ObjectDoc {
    io::from_json(&text(name)).expect("object document")
}

fn rat_algebra(name: &str) -> BLAlgebra<Rational> {
    obj(name).algebra().expect("rational algebra")
}

fn bounds(m: &Manifest, e: &ManifestEntry) -> Truncation {
    e.truncation.clone().unwrap_or_else(|| m.truncation.clone())
}

fn trunc(e: &Expression<N>, w: &Rational) -> Expression<N> {
    e.map_coefficients(|c| c.truncate(Some(w)))
}

// 1. Sign oracle.

fn sign_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut exhaustive = 0;
    for g in 1..=3usize {
        for parities in (0..g).map(|_| [Parity::Even, Parity::Odd]).multi_cartesian_product() {
            let space = space_with(&parities);
            for op_parity in [Parity::Odd, Parity::Even] {
                let op = random_operator(&mut rng, &space, op_parity, 3, 2, 0.7);
                let hat = HatP::new(&op);
                for n in 1..=4 {
                    for raw in all_raw(&space, n) {
                        let mut got = Expression::zero();
                        hat.apply_raw(&raw, &Rational::one(), &mut got);
                        ensure(got == leibniz_phat(&op, &raw), || format!("exhaustive case {raw:?}"))?;
                        exhaustive += 1;
                    }
                }
            }
        }
    }
    let mut random = 0;
    for case in 0..1200 {
        let g = rng.gen_range(1..=4);
        let parities: Vec<Parity> = (0..g).map(|_| Parity::from_odd(rng.gen_bool(0.5))).collect();
        let space = space_with(&parities);
        let op_parity = Parity::from_odd(rng.gen_bool(0.5));
        let op = random_operator(&mut rng, &space, op_parity, 3, 3, 0.5);
        let n = rng.gen_range(1..=4);
        let raw = random_raw(&mut rng, &space, n, true);
        let mut got = Expression::zero();
        HatP::new(&op).apply_raw(&raw, &Rational::one(), &mut got);
        ensure(got == leibniz_phat(&op, &raw), || format!("random case {case}: {raw:?}"))?;
        random += 1;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{exhaustive} exhaustive + {random} random cases in {:.1}s", took.as_secs_f64()))
}

// 2. Fixed counts and signs.

fn forest(space: &Space) -> Vec<Vec<Letter>> {
    let l = |id: &str| space.letter(id).unwrap();
    vec![vec![l("v1"), l("v2"), l("v3")], vec![l("v4"), l("v5"), l("v6")], vec![l("v7"), l("v8")]]
}

fn partitions(n: usize, sizes: &[usize]) -> usize {
    fn go(rest: &mut Vec<usize>, used: &mut [bool]) -> usize {
        let Some(first) = used.iter().position(|u| !u) else {
            return usize::from(rest.is_empty());
        };
        let mut total = 0;
        for size in rest.iter().copied().unique().collect::<Vec<_>>() {
            let pos = rest.iter().position(|s| *s == size).unwrap();
            rest.remove(pos);
            used[first] = true;
            let free: Vec<usize> = (0..used.len()).filter(|i| !used[*i]).collect();
            for others in free.into_iter().combinations(size - 1) {
                others.iter().for_each(|i| used[*i] = true);
                total += go(rest, used);
                others.iter().for_each(|i| used[*i] = false);
            }
            used[first] = false;
            rest.insert(pos, size);
        }
        total
    }
    go(&mut sizes.to_vec(), &mut vec![false; n])
}

fn pinned_counts() -> Check {
    // 21 gluings of an arity-2 component, for every parity pattern.
    for mask in 0..256u32 {
        let gens = (1..=8).map(|i| Generator::new(format!("v{i}"), Parity::from_odd(mask >> (i - 1) & 1 == 1))).collect();
        let space = Space::new(gens).unwrap();
        let (_, s) = Sentence::from_raw(&forest(&space)).unwrap();
        let n = enumerate_gluings(&s, 2, false).len();
        ensure(n == 21, || format!("{n} gluings for parities {mask:08b}"))?;
    }
    let fixture: GluingDoc = io::from_json(&text("gluing-21.json")).map_err(|e| e.to_string())?;
    ensure(fixture.count().map_err(|e| e.to_string())? == 21, || "catalog fixture count".into())?;

    // Cross-word gluing: p^{2,3}(v3 v4) = abc carries (-1)^{(|v1|+|v2|)|p|}.
    let mut signs = 0;
    for mask in 0..2048u32 {
        let bit = |i: u32| mask >> i & 1 == 1;
        let mut gens: Vec<Generator> = (1..=8).map(|i| Generator::new(format!("v{i}"), Parity::from_odd(bit(i - 1)))).collect();
        let pc = (bit(2) ^ bit(3) ^ true) ^ bit(8) ^ bit(9);
        for (id, odd) in [("a", bit(8)), ("b", bit(9)), ("c", pc)] {
            gens.push(Generator::new(id, Parity::from_odd(odd)));
        }
        let space = Space::new(gens).unwrap();
        let l = |id: &str| space.letter(id).unwrap();
        let (s_in, key) = Word::from_letters(vec![l("v3"), l("v4")]).unwrap();
        let Some((s_out, out)) = Word::from_letters(vec![l("a"), l("b"), l("c")]) else { continue };
        let mut op = Operator::new(Parity::Odd);
        op.add(&key, out, (s_in * s_out).apply(q(1)));
        let image = HatP::new(&op).apply(&Expression::from_raw(&forest(&space), q(1)));
        let sign = if bit(0) ^ bit(1) { q(-1) } else { q(1) };
        let glued = vec![vec![l("v1"), l("v2"), l("a"), l("b"), l("c"), l("v5"), l("v6")], vec![l("v7"), l("v8")]];
        let expected = Expression::from_raw(&glued, sign);
        let (sentence, want) = expected.iter().next().unwrap();
        ensure(image.coefficient(sentence) == *want, || format!("cross-word sign, parities {mask:011b}"))?;
        signs += 1;
    }

    // Exponential grouping: phi^{n,1}(t^n) = u_n.
    let src = Space::new(vec![Generator::new("t", Parity::Even)]).unwrap();
    let tgt = Space::new((1..=3).map(|i| Generator::new(format!("u{i}"), Parity::Even)).collect()).unwrap();
    let mut op = Operator::new(Parity::Even);
    for n in 1..=3 {
        let (_, key) = src.word_nonzero(&vec!["t"; n]).unwrap();
        let (_, out) = tgt.word_nonzero(&[&format!("u{n}")]).unwrap();
        op.add(&key, out, N::one());
    }
    let f = BLMorphism::from_operator(src.clone(), tgt.clone(), op).map_err(|e| e.to_string())?;
    let t = Truncation::new(3, 5, q(6), 0);
    let (_, tw) = src.word_nonzero(&["t"]).unwrap();
    let e = mc::exp_element(&Expression::term(Sentence::single(tw), N::monomial(q(1), q(1))), &t).map_err(|e| e.to_string())?;
    let image = trunc(&f.hat().apply(&e), &t.weight_cutoff);
    let mut coeffs = 0;
    for ms in (0..3).map(|_| 0..=5usize).multi_cartesian_product() {
        let total: usize = ms.iter().enumerate().map(|(i, m)| (i + 1) * m).sum();
        if total >= 6 {
            continue;
        }
        let mut words = Vec::new();
        let mut sizes = Vec::new();
        for (i, m) in ms.iter().enumerate() {
            let (_, w) = tgt.word_nonzero(&[&format!("u{}", i + 1)]).unwrap();
            words.extend(std::iter::repeat(w).take(*m));
            sizes.extend(std::iter::repeat(i + 1).take(*m));
        }
        let (_, s) = Sentence::from_words(words).unwrap();
        let mut denom = Rational::one();
        for (i, m) in ms.iter().enumerate() {
            denom = denom * Rational::factorial(*m) * pow(&Rational::factorial(i + 1), *m);
        }
        let closed = Rational::factorial(total) / denom;
        ensure(Rational::int(partitions(total, &sizes) as i64) == closed, || format!("partition count {ms:?}"))?;
        let want = N::monomial(closed / Rational::factorial(total), q(total as i64));
        ensure(image.coefficient(&s) == want, || format!("coefficient of {ms:?}"))?;
        coeffs += 1;
    }
    Ok(format!("21 gluings x 256 parity patterns, {signs} cross-word signs, {coeffs} grouping coefficients"))
}

fn pow(x: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * x.clone())
}

// 3. Structure equations on the catalog.

fn structure_suite() -> Check {
    let start = Instant::now();
    let m = manifest();
    ensure(m.truncation == Truncation::new(4, 4, q(3), 2), || "manifest truncation is not (4,4,3,2)".into())?;
    let (mut valid, mut counter) = (0, 0);
    for e in &m.entries {
        let Some(verdict) = &e.expect.verify else { continue };
        let t = bounds(&m, e);
        let (passed, witness) = match e.object.as_str() {
            "algebra" => {
                let d = obj(&e.file);
                match d.coefficients {
                    Ring::Rational => {
                        let a: BLAlgebra<Rational> = d.algebra().map_err(|x| x.to_string())?;
                        let r = st::verify_bl(&a, &t);
                        (r.passed(), r.witness.map(|s| io::sentence_doc(&a.space, &s)))
                    }
                    Ring::Novikov => {
                        let a: BLAlgebra<N> = d.algebra().map_err(|x| x.to_string())?;
                        let r = st::verify_bl(&a, &t);
                        (r.passed(), r.witness.map(|s| io::sentence_doc(&a.space, &s)))
                    }
                }
            }
            "ibl-algebra" => {
                let a = obj(&e.file).ibl().map_err(|x| x.to_string())?;
                let ev = ibl::verify_ibl(&a, &t);
                let sv = ibl::verify_ibl_sv(&a, &t);
                ensure(ev.passed() == sv.passed(), || format!("{}: formulations disagree", e.file))?;
                (ev.passed(), ev.witness.map(|s| io::sentence_doc(&a.space, &s)))
            }
            _ => continue,
        };
        ensure(passed == (verdict == "pass"), || format!("{}: expected {verdict}", e.file))?;
        if passed {
            valid += 1;
        } else {
            counter += 1;
            if let Some(w) = &e.expect.witness {
                ensure(witness.as_ref() == Some(w), || format!("{}: witness {witness:?}, expected {w:?}", e.file))?;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    ensure(valid > 0 && counter > 0, || "catalog lacks valid or failing objects".into())?;
    Ok(format!("{valid} valid pass, {counter} counterexamples fail at their witness, {:.1}s", took.as_secs_f64()))
}

// 4. Torsion values.

fn torsion_values() -> Check {
    let t = Truncation::default();
    for (file, want) in [("A0.json", Some(0)), ("A1.json", Some(1)), ("zero.json", None)] {
        let a = rat_algebra(file);
        let r = invariants::torsion(&a, &t).map_err(|e| e.to_string())?;
        ensure(invariants::torsion_value(&r) == want, || format!("{file}: got {:?}", invariants::torsion_value(&r)))?;
        match &r {
            Search::Found { k, witness } => {
                ensure(invariants::check_torsion_witness(&a, witness, *k), || format!("{file}: witness"))?;
            }
            Search::NotFound { bounds } => ensure(*bounds == t, || format!("{file}: bounds not carried"))?,
        }
    }
    Ok("A0 = 0, A1 = 1, zero = not_found; witnesses re-verify".into())
}

// 5. Deformation identities.

fn random_even<R: Rng>(rng: &mut R, space: &Space, w: &Rational) -> Expression<N> {
    let even: Vec<Word> = (1..=2).flat_map(|k| words_of_len(space, k)).filter(|v| !v.is_odd()).collect();
    let mut a = Expression::zero();
    for _ in 0..rng.gen_range(1..=3) {
        if let Some(v) = even.choose(rng) {
            let e = Rational::new(rng.gen_range(1..=4), 2);
            if &e < w {
                a.add_term(Sentence::single(v.clone()), N::monomial(q(rng.gen_range(-2..=2)), e));
            }
        }
    }
    a
}

fn deformation_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let empty = Expression::term(Sentence::empty(), N::one());
    // exp_{-a} ∘ exp_a = id.
    let t = Truncation::new(3, 4, q(3), 0);
    for case in 0..50 {
        let space = space_with(&[Parity::Even, Parity::Odd, Parity::Even][..1 + case % 3]);
        let a = random_even(&mut rng, &space, &t.weight_cutoff);
        let basis = basis::sentences(&space, &BasisSpec::nonempty(&Truncation::new(2, 2, q(3), 0)));
        let x = Expression::term(basis.choose(&mut rng).unwrap().clone(), N::one());
        let there = mc::exp_map(&a, &x, &t).map_err(|e| e.to_string())?;
        let back = mc::exp_map(&a.negated(), &there, &t).map_err(|e| e.to_string())?;
        ensure(trunc(&back, &t.weight_cutoff) == x, || format!("exp inverse, case {case}"))?;
    }
    // p-hat(s ⊙ e^a) = p_a-hat(s) ⊙ e^a ± s ⊙ p-hat(e^a - 1) on random (s, a).
    let t = Truncation::new(3, 3, q(2), 0);
    let w = &t.weight_cutoff;
    let mut cases = 0;
    while cases < 200 {
        let parities = [Parity::Odd, Parity::Even, Parity::Even, Parity::Odd];
        let space = space_with(&parities[..2 + cases % 3]);
        let op = random_operator(&mut rng, &space, Parity::Odd, 2, 2, 0.4).map_coefficients(N::from_rational);
        let a = random_even(&mut rng, &space, w);
        let ea = mc::exp_element(&a, &t).map_err(|e| e.to_string())?;
        let alg = BLAlgebra::from_operator(space.clone(), op.clone()).map_err(|e| e.to_string())?;
        let p_a = mc::deformed_operator(&alg, &ea, &t);
        let p = HatP::new(&op);
        let basis = basis::sentences(&space, &BasisSpec::nonempty(&Truncation::new(2, 2, q(2), 0)));
        for _ in 0..4 {
            let s = basis.choose(&mut rng).unwrap().clone();
            let x = Expression::term(s.clone(), N::one());
            let lhs = trunc(&p.apply(&x.odot(&ea)), w);
            let mut rhs = HatP::new(&p_a).apply(&x).odot(&ea);
            let sign = if s.parity().is_odd() { N::one().negated() } else { N::one() };
            rhs.add_scaled(&x.odot(&p.apply(&ea.minus(&empty))), &sign);
            ensure(lhs == trunc(&rhs, w), || format!("p_a identity, case {cases}"))?;
            cases += 1;
        }
    }
    // Catalog MC pairs.
    let m = manifest();
    let mut pairs = 0;
    for e in m.entries.iter().filter(|e| e.object == "mc") {
        let t = bounds(&m, e);
        let a: BLAlgebra<N> = obj(e.algebra.as_deref().unwrap()).algebra().map_err(|x| x.to_string())?;
        let doc: McDoc = io::from_json(&text(&e.file)).map_err(|x| x.to_string())?;
        let mcv = doc.element(&t).map_err(|x| x.to_string())?;
        ensure(mc::verify_mc(&a, &mcv, &t).map_err(|x| x.to_string())?.passed(), || format!("{} is not MC", e.file))?;
        let d = mc::deform_structure(&a, &mcv, &t).map_err(|x| x.to_string())?;
        ensure(d.intertwining.passed(), || format!("{}: p ∘ exp_mc != exp_mc ∘ p_mc", e.file))?;
        ensure(d.square_zero.passed(), || format!("{}: p_mc squared", e.file))?;
        ensure(d.conjugation.passed(), || format!("{}: conjugation", e.file))?;
        pairs += 1;
    }
    // e^{phi(mc)} = phi-hat(e^mc) along catalog morphisms with an MC element.
    let mut pushes = 0;
    for e in m.entries.iter().filter(|e| e.object == "morphism" && e.expect.deform.is_some()) {
        let t = bounds(&m, e);
        let f: BLMorphism<N> = obj(&e.file).morphism().map_err(|x| x.to_string())?;
        let s: BLAlgebra<N> = obj(e.source.as_deref().unwrap()).algebra().map_err(|x| x.to_string())?;
        let tg: BLAlgebra<N> = obj(e.target.as_deref().unwrap()).algebra().map_err(|x| x.to_string())?;
        let doc: McDoc = io::from_json(&text(e.algebra.as_deref().unwrap())).map_err(|x| x.to_string())?;
        let mcv = doc.element(&t).map_err(|x| x.to_string())?;
        let d = mc::deform_morphism(&f, &s, &tg, &mcv, &t).map_err(|x| x.to_string())?;
        ensure(d.pushforward.exp_identity.passed(), || format!("{}: exponential identity", e.file))?;
        ensure(d.pushforward.is_mc.passed(), || format!("{}: pushed element is not MC", e.file))?;
        ensure(d.intertwining.passed(), || format!("{}: deformed morphism", e.file))?;
        pushes += 1;
    }
    ensure(pairs > 0 && pushes > 0, || "no catalog MC data".into())?;
    Ok(format!("exp inverse x50, p_a identity x{cases}, {pairs} MC pair(s), {pushes} pushforward(s)"))
}

// 6. Linearization.

fn augmentation(space: &Space, values: &[(Word, Rational)]) -> Augmentation<Rational> {
    let mut comps: Vec<ComponentMap<Rational>> = Vec::new();
    for (w, c) in values {
        let i = match comps.iter().position(|x| x.arity == w.len()) {
            Some(i) => i,
            None => {
                comps.push(ComponentMap::new(ComponentKind::Augmentation, w.len(), 0, Parity::Even));
                comps.len() - 1
            }
        };
        comps[i].add(w.clone(), Word::empty(), c.clone());
    }
    Augmentation::new(space.clone(), comps).unwrap()
}

fn random_values<R: Rng>(rng: &mut R, space: &Space, density: f64) -> Vec<(Word, Rational)> {
    let mut out = Vec::new();
    for w in (1..=3).flat_map(|k| words_of_len(space, k)).filter(|w| !w.is_odd()) {
        if rng.gen_bool(density) {
            let c = rng.gen_range(-2..=2);
            if c != 0 {
                out.push((w, q(c)));
            }
        }
    }
    out
}

fn no_constants(a: &BLAlgebra<Rational>, eps: &Augmentation<Rational>, t: &Truncation) -> Result<bool, String> {
    let lin = st::linearize(a, eps, t).map_err(|e| e.to_string())?;
    Ok(lin.constant_terms.is_empty()
        && lin.algebra.operator().entries().all(|(_, p)| !p.contains_key(&Word::empty()))
        && lin.report.passed())
}

fn linearization() -> Check {
    let m = manifest();
    let mut n = 0;
    for e in m.entries.iter().filter(|e| e.object == "augmentation") {
        let t = bounds(&m, e);
        let a = rat_algebra(e.algebra.as_deref().unwrap());
        let eps: Augmentation<Rational> = obj(&e.file).augmentation().map_err(|x| x.to_string())?;
        ensure(st::verify_augmentation(&eps, &a, &t).map_err(|x| x.to_string())?.passed(), || format!("{} invalid", e.file))?;
        ensure(no_constants(&a, &eps, &t)?, || format!("{}: constant terms", e.file))?;
        n += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = catalog::dga();
    let t = Truncation::new(3, 3, q(3), 0);
    let mut random = 0;
    for _ in 0..20 {
        let eps = augmentation(&a.space, &random_values(&mut rng, &a.space, 0.4));
        if st::verify_augmentation(&eps, &a, &t).map_err(|x| x.to_string())?.passed() {
            ensure(no_constants(&a, &eps, &t)?, || "random augmentation: constant terms".into())?;
            random += 1;
        }
    }
    Ok(format!("{n} catalog and {random} random augmentations, p^(k,0)_eps = 0"))
}

// 7. Hierarchy inequalities.

fn random_pointed<R: Rng>(rng: &mut R, a: &BLAlgebra<Rational>) -> PointedMap<Rational> {
    let mut op = Operator::new(Parity::Even);
    for (w, c) in random_values(rng, &a.space, 0.3) {
        op.add(&w, Word::empty(), c);
    }
    PointedMap::from_operator(a.space.clone(), op).unwrap()
}

fn hierarchy() -> Check {
    let m = manifest();
    let (mut le, mut funct, mut pushed) = (0, 0, 0);
    for e in &m.entries {
        let t = bounds(&m, e);
        match e.object.as_str() {
            "pointed" => {
                let a = rat_algebra(e.algebra.as_deref().unwrap());
                let eps: Augmentation<Rational> = obj(e.augmentation.as_deref().unwrap()).augmentation().map_err(|x| x.to_string())?;
                let p: PointedMap<Rational> = obj(&e.file).pointed().map_err(|x| x.to_string())?;
                let o = invariants::order(&a, &eps, &p, &t).map_err(|x| x.to_string())?;
                let ot = invariants::tilde_order(&a, &eps, &p, &t).map_err(|x| x.to_string())?;
                ensure(invariants::order_le_tilde(&o, &ot) != Some(false), || format!("{}: O > O~", e.file))?;
                le += 1;
            }
            "pointed-morphism" => {
                let fdot: PointedMorphism<Rational> = obj(&e.file).pointed_morphism().map_err(|x| x.to_string())?;
                let f: BLMorphism<Rational> = obj(e.morphism.as_deref().unwrap()).morphism().map_err(|x| x.to_string())?;
                let s = rat_algebra(e.source.as_deref().unwrap());
                let tg = rat_algebra(e.target.as_deref().unwrap());
                let eps: Augmentation<Rational> = obj(e.augmentation.as_deref().unwrap()).augmentation().map_err(|x| x.to_string())?;
                let pd: PointedMap<Rational> = obj(e.source_pointed.as_deref().unwrap()).pointed().map_err(|x| x.to_string())?;
                let qd: PointedMap<Rational> = obj(e.target_pointed.as_deref().unwrap()).pointed().map_err(|x| x.to_string())?;
                let r = invariants::order_functoriality(&f, &fdot, &s, &tg, &eps, &pd, &qd, &t).map_err(|x| x.to_string())?;
                ensure(r.holds(), || format!("{}: {:?} < {:?}", e.file, r.source.k(), r.target.k()))?;
                funct += 1;
            }
            "morphism" if obj(&e.file).coefficients == Ring::Rational => {
                let f: BLMorphism<Rational> = obj(&e.file).morphism().map_err(|x| x.to_string())?;
                let s = rat_algebra(e.source.as_deref().unwrap());
                let tg = rat_algebra(e.target.as_deref().unwrap());
                if let Search::Found { k, witness } = invariants::torsion(&s, &t).map_err(|x| x.to_string())? {
                    let y = invariants::push_torsion_witness(&f, &s, &tg, &witness, k).map_err(|x| x.to_string())?;
                    ensure(invariants::check_torsion_witness(&tg, &y, k), || format!("{}: pushed witness", e.file))?;
                    let kt = invariants::torsion(&tg, &t).map_err(|x| x.to_string())?.k();
                    ensure(kt.is_some_and(|kt| kt <= k), || format!("{}: target torsion {kt:?} > {k}", e.file))?;
                    pushed += 1;
                }
            }
            _ => {}
        }
    }
    // Random pointed maps on the dga, which has orders 1 to 3.
    let a = catalog::dga();
    let eps = catalog::dga_eps();
    let t = Truncation::new(3, 3, q(3), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut random = 0;
    for _ in 0..8 {
        let p = random_pointed(&mut rng, &a);
        if !st::verify_pointed(&p, &a, &t).map_err(|x| x.to_string())?.passed() {
            continue;
        }
        let o = invariants::order(&a, &eps, &p, &t).map_err(|x| x.to_string())?;
        let ot = invariants::tilde_order(&a, &eps, &p, &t).map_err(|x| x.to_string())?;
        ensure(invariants::order_le_tilde(&o, &ot) != Some(false), || "random dga pointed map: O > O~".into())?;
        random += 1;
    }
    ensure(le > 0 && funct > 0 && pushed > 0, || "catalog lacks hierarchy data".into())?;
    Ok(format!("O <= O~ on {le} catalog + {random} random, {funct} functoriality quadruple(s), {pushed} torsion push(es)"))
}

// 8. IBL suite.

fn perturb<R: Rng>(rng: &mut R, base: &IBLAlgebra) -> IBLAlgebra {
    let space = base.space.clone();
    let mut a = base.clone();
    for _ in 0..rng.gen_range(1..=2) {
        let op = random_operator(rng, &space, Parity::Odd, 2, 2, 0.25);
        for mut c in op.to_components(ComponentKind::Structure) {
            c.genus = rng.gen_range(0..=2);
            a = a.with_component(c).unwrap();
        }
    }
    a
}

fn ibl_suite() -> Check {
    let m = manifest();
    let t = m.truncation.clone();
    let algebras: Vec<(String, IBLAlgebra)> = m
        .entries
        .iter()
        .filter(|e| e.object == "ibl-algebra")
        .map(|e| (e.file.clone(), obj(&e.file).ibl().unwrap()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut agree = 0;
    for (name, a) in &algebras {
        ensure(ibl::verify_ibl(a, &t).passed() == ibl::verify_ibl_sv(a, &t).passed(), || format!("{name}: formulations"))?;
        agree += 1;
    }
    for i in 0..100 {
        let a = perturb(&mut rng, &algebras[i % algebras.len()].1);
        ensure(ibl::verify_ibl(&a, &t).passed() == ibl::verify_ibl_sv(&a, &t).passed(), || format!("perturbation {i}"))?;
        ensure(ibl::check_hbar_width(&a, &t).is_ok(), || format!("perturbation {i}: hbar width"))?;
        agree += 1;
    }
    let (mut chains, mut witnesses) = (0, 0);
    for (name, a) in algebras.iter().filter(|(_, a)| ibl::verify_ibl(a, &t).passed()) {
        for k in 1..=t.max_sentence_len {
            ensure(ibl::verify_cm_chain(a, k, &t).passed(), || format!("{name}: C_{k} chain map"))?;
            chains += 1;
        }
        ensure(ibl::check_hbar_width(a, &t).is_ok(), || format!("{name}: hbar width"))?;
        let cells = ibl::grid_properties_check(a, &t).map_err(|e| e.to_string())?;
        ensure(ibl::grid_consistent(&cells), || format!("{name}: grid"))?;
        for c in &cells {
            if let GridTorsion::Witness { x, degenerate: false, .. } = &c.result {
                let y = ibl::cm_transform(a, x, c.n, c.m, Some(c.k)).map_err(|e| e.to_string())?;
                ensure(ibl::check_grid_witness(a, &y, c.n + c.m as u32, 0, c.k), || {
                    format!("{name}: ({}, {})_{} transform", c.n, c.m, c.k)
                })?;
                witnesses += 1;
            }
        }
    }
    ensure(witnesses > 0, || "no grid witnesses".into())?;
    Ok(format!("{agree} agreements, {chains} C_m checks, {witnesses} witnesses transformed"))
}

// 9. CLI determinism and round trip.

fn resave(object: &str, contents: &str) -> Result<String, String> {
    let e = |x: blinfty::Error| x.to_string();
    Ok(match object {
        "mc" => {
            let d: McDoc = io::from_json(contents).map_err(e)?;
            let mcv = d.element(&Truncation::default()).map_err(e)?;
            let p = d.pointed_element().map_err(e)?;
            io::to_json(&McDoc::new(&d.space().map_err(e)?, &mcv, p.as_ref())).map_err(e)?
        }
        "gluing-fixture" => io::to_json(&io::from_json::<GluingDoc>(contents).map_err(e)?).map_err(e)?,
        _ => {
            let d: ObjectDoc = io::from_json(contents).map_err(e)?;
            let nov = d.coefficients == Ring::Novikov;
            let again = match object {
                "algebra" if nov => ObjectDoc::from_algebra(&d.algebra::<N>().map_err(e)?),
                "algebra" => ObjectDoc::from_algebra(&d.algebra::<Rational>().map_err(e)?),
                "ibl-algebra" => ObjectDoc::from_ibl(&d.ibl().map_err(e)?),
                "morphism" if nov => ObjectDoc::from_morphism(&d.morphism::<N>().map_err(e)?),
                "morphism" => ObjectDoc::from_morphism(&d.morphism::<Rational>().map_err(e)?),
                "augmentation" => ObjectDoc::from_augmentation(&d.augmentation::<Rational>().map_err(e)?),
                "pointed" => ObjectDoc::from_pointed(&d.pointed::<Rational>().map_err(e)?),
                "pointed-morphism" => ObjectDoc::from_pointed_morphism(&d.pointed_morphism::<Rational>().map_err(e)?),
                other => return Err(format!("unexpected object {other}")),
            };
            io::to_json(&again).map_err(e)?
        }
    })
}

fn cli_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_blinfty");
    let m = manifest();
    for e in &m.entries {
        let t = text(&e.file);
        ensure(resave(&e.object, &t)? == t, || format!("{}: reload differs", e.file))?;
    }
    let shipped_manifest = text(catalog::MANIFEST);
    ensure(io::to_json(&m).map_err(|e| e.to_string())? == shipped_manifest, || "manifest reload differs".into())?;

    let written = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = Command::new(bin).arg("catalog").arg(written.path()).output().map_err(|e| e.to_string())?;
    ensure(w.status.success(), || "catalog write failed".into())?;
    for e in &m.entries {
        let fresh = std::fs::read_to_string(written.path().join(&e.file)).map_err(|x| x.to_string())?;
        ensure(fresh == text(&e.file), || format!("{}: written file differs", e.file))?;
    }
    let run = || Command::new(bin).arg("catalog").arg(dir()).arg("--check").output();
    let a = run().map_err(|e| e.to_string())?;
    let b = run().map_err(|e| e.to_string())?;
    ensure(a.status.success(), || String::from_utf8_lossy(&a.stderr).into_owned())?;
    ensure(a.stdout == b.stdout, || "catalog reports differ between runs".into())?;
    Ok(format!("{} files reload byte-identically; two full catalog runs agree ({} bytes)", m.entries.len(), a.stdout.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("sign-oracle equivalence", sign_oracle),
        ("gluing counts and signs", pinned_counts),
        ("structure-equation suite", structure_suite),
        ("torsion values", torsion_values),
        ("deformation identities", deformation_identities),
        ("linearization", linearization),
        ("hierarchy inequalities", hierarchy),
        ("IBL suite", ibl_suite),
        ("CLI determinism and round-trip", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS  {name} [tolerance 0, {secs:.1}s]: {detail}"),
            Err(why) => {
                println!("FAIL  {name} [tolerance 0, {secs:.1}s]: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
