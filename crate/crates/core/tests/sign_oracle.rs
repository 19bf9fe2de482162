//! The assembled `p-hat` agrees with the Leibniz-rule evaluator on
//! letter-level representatives, canonical or not.

mod common;

use blinfty::assembler::{HatMap, HatP};
use blinfty::scalar::Rational;
use blinfty::space::{Expression, Parity, Sentence};
use common::*;
use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn exhaustive_small_cases_match_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0;
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
                        let want = leibniz_phat(&op, &raw);
                        assert_eq!(got, want, "raw {raw:?}");
                        cases += 1;
                    }
                }
            }
        }
    }
    assert!(cases > 1000);
}

#[test]
fn random_cases_match_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let g = 1 + case % 4;
        let parities: Vec<Parity> = (0..g).map(|i| if (case + i) % 3 == 0 { Parity::Even } else { Parity::Odd }).collect();
        let space = space_with(&parities);
        let op_parity = if case % 2 == 0 { Parity::Odd } else { Parity::Even };
        let op = random_operator(&mut rng, &space, op_parity, 3, 3, 0.5);
        let raw = random_raw(&mut rng, &space, 1 + case % 6, true);
        let mut got = Expression::zero();
        HatP::new(&op).apply_raw(&raw, &Rational::one(), &mut got);
        assert_eq!(got, leibniz_phat(&op, &raw), "case {case} raw {raw:?}");
        if let Some((sign, s)) = Sentence::from_raw(&raw) {
            let canonical = HatP::new(&op).apply_sentence(&s);
            assert_eq!(canonical.scaled(&Rational::int(sign.to_i64())), got);
        }
    }
}
