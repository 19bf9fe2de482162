//! Properties of the assembled hat-maps that do not need an oracle.

mod common;

use blinfty::assembler::{enumerate_gluings, HatIbl, HatMap, HatP, HatPhi, Operator};
use blinfty::scalar::{NovikovElem, Rational};
use blinfty::space::{Expression, Generator, Letter, Parity, Sentence, Space, Word};
use common::{random_operator, random_raw, space_with};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parities() -> impl Strategy<Value = Vec<Parity>> {
    prop::collection::vec(any::<bool>().prop_map(Parity::from_odd), 1..=3)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn by_raw<H: Fn(&[Vec<Letter>], &mut Expression<Rational>)>(raw: &[Vec<Letter>], f: H) -> Expression<Rational> {
    let mut out = Expression::zero();
    f(raw, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Evaluating on a non-canonical representative agrees with evaluating
    /// on its canonical form times the reordering sign.
    #[test]
    fn representative_independence(ps in parities(), seed in any::<u64>(), n in 1usize..=4) {
        let space = space_with(&ps);
        let mut r = rng(seed);
        let p = random_operator(&mut r, &space, Parity::Odd, 2, 2, 0.5);
        let f = random_operator(&mut r, &space, Parity::Even, 2, 2, 0.5);
        let raw = random_raw(&mut r, &space, n, true);
        let canon = Expression::from_raw(&raw, Rational::one());
        let one = Rational::one();
        prop_assert_eq!(by_raw(&raw, |x, o| { HatP::new(&p).apply_raw(x, &one, o); }), HatP::new(&p).apply(&canon));
        prop_assert_eq!(by_raw(&raw, |x, o| { HatPhi::new(&f).apply_raw(x, &one, o); }), HatPhi::new(&f).apply(&canon));
    }

    /// `|p-hat(s)| = |s| + 1`, `|phi-hat(s)| = |s|` term by term.
    #[test]
    fn parity_bookkeeping(ps in parities(), seed in any::<u64>(), n in 1usize..=4) {
        let space = space_with(&ps);
        let mut r = rng(seed);
        let p = random_operator(&mut r, &space, Parity::Odd, 3, 2, 0.5);
        let f = random_operator(&mut r, &space, Parity::Even, 2, 2, 0.5);
        let raw = random_raw(&mut r, &space, n, false);
        let Some((_, s)) = Sentence::from_raw(&raw) else { return Ok(()) };
        for (t, _) in HatP::new(&p).apply_sentence(&s).iter() {
            prop_assert_eq!(t.parity(), s.parity() + Parity::Odd);
        }
        for (t, _) in HatPhi::new(&f).apply_sentence(&s).iter() {
            prop_assert_eq!(t.parity(), s.parity());
        }
    }

    /// `m` copies of an even letter under a unary component give `m` times
    /// the single replacement.
    #[test]
    fn multiplicity(m in 1usize..=4, extra in 0usize..=2, c in -3i64..=3) {
        prop_assume!(c != 0);
        let space = Space::new(vec![
            Generator::new("x", Parity::Odd),
            Generator::new("y", Parity::Even),
            Generator::new("z", Parity::Even),
        ]).unwrap();
        let l = |id: &str| space.letter(id).unwrap();
        let mut op = Operator::new(Parity::Odd);
        op.add(&Word::single(l("y")), Word::single(l("x")), Rational::int(c));
        let mut word = vec![l("y"); m];
        word.extend(vec![l("z"); extra]);
        let input = Expression::from_raw(&[word], Rational::one());
        let mut replaced = vec![l("x")];
        replaced.extend(vec![l("y"); m - 1]);
        replaced.extend(vec![l("z"); extra]);
        let want = Expression::from_raw(&[replaced], Rational::int(c * m as i64));
        prop_assert_eq!(HatP::new(&op).apply(&input), want);
    }

    /// Every output term of a weight-homogeneous operator keeps the input
    /// weight once the `T`-exponent is counted.
    #[test]
    fn weight_preservation(weights in prop::collection::vec(0i64..3, 3), seed in any::<u64>(), n in 1usize..=4) {
        let gens: Vec<Generator> = [Parity::Odd, Parity::Even, Parity::Even]
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(i, (p, w))| Generator::new(format!("g{i}"), *p).with_weight(Rational::int(*w)))
            .collect();
        let space = Space::new(gens).unwrap();
        let mut r = rng(seed);
        let raw_op = random_operator(&mut r, &space, Parity::Odd, 2, 2, 0.6);
        let mut op: Operator<NovikovElem> = Operator::new(Parity::Odd);
        for (input, poly) in raw_op.entries() {
            for (out, c) in poly {
                let deficit = space.word_weight(input) - space.word_weight(out);
                if !deficit.is_negative() {
                    op.add(input, out.clone(), NovikovElem::monomial(c.clone(), deficit));
                }
            }
        }
        let raw = random_raw(&mut r, &space, n, false);
        let Some((_, s)) = Sentence::from_raw(&raw) else { return Ok(()) };
        let w = space.sentence_weight(&s);
        for (t, c) in HatP::new(&op).apply_sentence(&s).iter() {
            for (_, e) in c.terms() {
                prop_assert_eq!(&space.sentence_weight(t) + e, w.clone());
            }
        }
    }

    /// Genus of an IBL gluing is letters consumed minus words touched.
    #[test]
    fn ibl_genus_bookkeeping(ps in parities(), seed in any::<u64>(), n in 1usize..=5, k in 1usize..=3) {
        let space = space_with(&ps);
        let mut r = rng(seed);
        let raw = random_raw(&mut r, &space, n, false);
        let Some((_, s)) = Sentence::from_raw(&raw) else { return Ok(()) };
        let all = enumerate_gluings(&s, k, true);
        let single = enumerate_gluings(&s, k, false);
        for g in &all {
            prop_assert!(g.letters.len() >= g.words.len());
            prop_assert_eq!(g.genus_increment as usize, g.letters.len() - g.words.len());
        }
        // The one-letter-per-word gluings are exactly the genus-0 ones.
        let genus0 = all.iter().filter(|g| g.genus_increment == 0).count();
        prop_assert_eq!(genus0, single.len());
    }

    /// The IBL assembly at `hbar^0` is the BL assembly.
    #[test]
    fn ibl_reduces_to_bl(ps in parities(), seed in any::<u64>(), n in 1usize..=4) {
        let space = space_with(&ps);
        let mut r = rng(seed);
        let p = random_operator(&mut r, &space, Parity::Odd, 2, 2, 0.5);
        let h = p.map_coefficients(|c| blinfty::ibl::H::monomial(c.clone(), 0));
        let raw = random_raw(&mut r, &space, n, false);
        let Some((_, s)) = Sentence::from_raw(&raw) else { return Ok(()) };
        let full = HatIbl::new(&h).apply_sentence(&s);
        let genus0: Expression<Rational> = full.iter().map(|(t, c)| (t.clone(), c.coefficient(0))).collect();
        prop_assert_eq!(genus0, HatP::new(&p).apply_sentence(&s));
    }
}
