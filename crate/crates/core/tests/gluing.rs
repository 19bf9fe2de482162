//! Counts and signs of single gluings on the three-tree forest
//! `(v1 v2 v3)(v4 v5 v6)(v7 v8)`.

use blinfty::assembler::{enumerate_gluings, HatMap, HatP, Operator};
use blinfty::catalog;
use blinfty::scalar::{Rational, Scalar};
use blinfty::space::{Expression, Generator, Letter, Parity, Space, Word};

fn forest(space: &Space) -> Vec<Vec<Letter>> {
    let l = |id: &str| space.letter(id).unwrap();
    vec![
        vec![l("v1"), l("v2"), l("v3")],
        vec![l("v4"), l("v5"), l("v6")],
        vec![l("v7"), l("v8")],
    ]
}

#[test]
fn twenty_one_ways_to_glue_an_arity_two_component() {
    for mask in 0..256u32 {
        let gens = (1..=8)
            .map(|i| Generator::new(format!("v{i}"), Parity::from_odd(mask >> (i - 1) & 1 == 1)))
            .collect();
        let space = Space::new(gens).unwrap();
        let (_, s) = blinfty::space::Sentence::from_raw(&forest(&space)).unwrap();
        let g = enumerate_gluings(&s, 2, false);
        assert_eq!(g.len(), 21, "mask {mask:08b}");
        // 3*3 + 3*2 + 3*2, by pair of trees.
        let by_pair = |a: usize, b: usize| g.iter().filter(|x| x.words == [a, b]).count();
        let sizes: Vec<usize> = s.words().iter().map(Word::len).collect();
        assert_eq!(by_pair(0, 1), sizes[0] * sizes[1]);
        assert_eq!(by_pair(0, 2), sizes[0] * sizes[2]);
        assert_eq!(by_pair(1, 2), sizes[1] * sizes[2]);
    }
}

#[test]
fn catalog_fixture_counts_twenty_one() {
    assert_eq!(catalog::gluing_fixture().count().unwrap(), 21);
}

/// `p^{2,3}(v3 v4) = a b c`. In the forest picture the component sits next
/// to `v3` and `v4`, so the only reordering is moving `p` past `v1 v2`.
#[test]
fn cross_word_gluing_sign() {
    let q = Rational::one;
    let mut seen = [0usize; 2];
    for mask in 0..2048u32 {
        let bit = |i: u32| mask >> i & 1 == 1;
        let mut gens: Vec<Generator> =
            (1..=8).map(|i| Generator::new(format!("v{i}"), Parity::from_odd(bit(i - 1)))).collect();
        // Outputs a, b, c with |a| + |b| + |c| = |v3| + |v4| + 1, so p is odd.
        let (pa, pb) = (bit(8), bit(9));
        let pc = (bit(2) ^ bit(3) ^ true) ^ pa ^ pb;
        for (id, odd) in [("a", pa), ("b", pb), ("c", pc)] {
            gens.push(Generator::new(id, Parity::from_odd(odd)));
        }
        let space = Space::new(gens).unwrap();
        let l = |id: &str| space.letter(id).unwrap();
        let (s_in, key) = Word::from_letters(vec![l("v3"), l("v4")]).unwrap();
        let Some((s_out, out)) = Word::from_letters(vec![l("a"), l("b"), l("c")]) else {
            continue;
        };
        let mut op = Operator::new(Parity::Odd);
        op.add(&key, out, (s_in * s_out).apply(q()));
        let input = Expression::from_raw(&forest(&space), q());
        if input.is_zero() {
            continue;
        }
        let image = HatP::new(&op).apply(&input);
        let v1v2 = bit(0) ^ bit(1);
        let sign = if v1v2 { q().negated() } else { q() };
        let glued = vec![
            vec![l("v1"), l("v2"), l("a"), l("b"), l("c"), l("v5"), l("v6")],
            vec![l("v7"), l("v8")],
        ];
        let expected = Expression::from_raw(&glued, sign);
        let (sentence, want) = expected.iter().next().expect("glued forest vanishes");
        assert_eq!(image.coefficient(sentence), *want, "mask {mask:011b}");
        seen[usize::from(v1v2)] += 1;
    }
    assert!(seen[0] > 100 && seen[1] > 100, "{seen:?}");
}
