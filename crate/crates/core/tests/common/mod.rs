//! Shared test support: an independent evaluator for `p-hat` built from the
//! Leibniz rule and the shuffle formula, plus random instance generators.

#![allow(dead_code)]

use blinfty::assembler::Operator;
use blinfty::scalar::Rational;
use blinfty::space::{koszul_sign, Expression, Generator, Letter, Parity, Space, Word};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

fn odd_count(ls: &[Letter]) -> usize {
    ls.iter().filter(|l| l.is_odd()).count()
}

/// `p-hat^k` on a tensor of `k` words, expanded letter by letter with the
/// Leibniz rule until every argument is a single letter.
pub fn leibniz_pk(op: &Operator<Rational>, ws: &[Vec<Letter>]) -> Vec<(Rational, Vec<Letter>)> {
    if ws.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let Some(i) = ws.iter().position(|w| w.len() != 1) else {
        let letters: Vec<Letter> = ws.iter().map(|w| w[0]).collect();
        let Some((sign, key)) = Word::from_letters(letters) else {
            return Vec::new();
        };
        return op
            .get(&key)
            .map(|poly| {
                poly.iter()
                    .map(|(u, c)| (sign.apply(c.clone()), u.letters().to_vec()))
                    .collect()
            })
            .unwrap_or_default();
    };
    let w = &ws[i];
    let before: usize = ws[..i].iter().map(|w| odd_count(w)).sum();
    let after: usize = ws[i + 1..].iter().map(|w| odd_count(w)).sum();
    let p = op.parity().is_odd() as usize;
    let mut out = Vec::new();
    for j in 0..w.len() {
        let lead = &w[..j];
        let trail = &w[j + 1..];
        let boxed = before * odd_count(lead) + odd_count(lead) * p + after * odd_count(trail);
        let mut sub = ws.to_vec();
        sub[i] = vec![w[j]];
        for (c, u) in leibniz_pk(op, &sub) {
            let mut word = lead.to_vec();
            word.extend(u);
            word.extend_from_slice(trail);
            let c = if boxed % 2 == 1 { -c } else { c };
            out.push((c, word));
        }
    }
    out
}

/// `p-hat` on a letter-level representative via shuffles and the Leibniz rule.
pub fn leibniz_phat(op: &Operator<Rational>, raw: &[Vec<Letter>]) -> Expression<Rational> {
    let n = raw.len();
    let odd: Vec<bool> = raw.iter().map(|w| odd_count(w) % 2 == 1).collect();
    let mut out = Expression::zero();
    for k in 1..=n {
        for chosen in (0..n).combinations(k) {
            let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            let order: Vec<usize> = chosen.iter().chain(&rest).copied().collect();
            let diamond = koszul_sign(&order, &odd);
            let args: Vec<Vec<Letter>> = chosen.iter().map(|&i| raw[i].clone()).collect();
            for (c, u) in leibniz_pk(op, &args) {
                let mut sentence = vec![u];
                sentence.extend(rest.iter().map(|&i| raw[i].clone()));
                out.add_expr(&Expression::from_raw(&sentence, diamond.apply(c)));
            }
        }
    }
    out
}

pub fn space_with(parities: &[Parity]) -> Space {
    let gens = parities
        .iter()
        .enumerate()
        .map(|(i, p)| Generator::new(format!("g{i}"), *p))
        .collect();
    Space::new(gens).unwrap()
}

/// All canonical nonvanishing words with the given letter count.
pub fn words_of_len(space: &Space, k: usize) -> Vec<Word> {
    let letters: Vec<Letter> = space.letters().collect();
    letters
        .iter()
        .copied()
        .combinations_with_replacement(k)
        .filter_map(|ls| Word::from_letters(ls).map(|(_, w)| w))
        .collect()
}

/// Random operator of the given parity with arities `1..=max_arity` and
/// outputs of length at most `max_out`.
pub fn random_operator<R: Rng>(
    rng: &mut R,
    space: &Space,
    parity: Parity,
    max_arity: usize,
    max_out: usize,
    density: f64,
) -> Operator<Rational> {
    let mut op = Operator::new(parity);
    let outs: Vec<Word> = (0..=max_out).flat_map(|l| words_of_len(space, l)).collect();
    for k in 1..=max_arity {
        for key in words_of_len(space, k) {
            if !rng.gen_bool(density) {
                continue;
            }
            let target = key.parity() + parity;
            let candidates: Vec<&Word> = outs.iter().filter(|w| w.parity() == target).collect();
            for _ in 0..rng.gen_range(1..=2) {
                if let Some(w) = candidates.choose(rng) {
                    let c = Rational::int(rng.gen_range(-3..=3));
                    op.add(&key, (*w).clone(), c);
                }
            }
        }
    }
    op
}

/// Random letter-level sentence with `n_letters` letters split into words;
/// empty words are allowed when `allow_empty`.
pub fn random_raw<R: Rng>(rng: &mut R, space: &Space, n_letters: usize, allow_empty: bool) -> Vec<Vec<Letter>> {
    let letters: Vec<Letter> = space.letters().collect();
    let mut raw: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..n_letters {
        if !raw.last().unwrap().is_empty() && rng.gen_bool(0.4) {
            raw.push(Vec::new());
        }
        raw.last_mut().unwrap().push(*letters.choose(rng).unwrap());
    }
    if allow_empty && rng.gen_bool(0.2) {
        let at = rng.gen_range(0..=raw.len());
        raw.insert(at, Vec::new());
    }
    raw
}

/// Every letter-level sentence with exactly `n` letters: each ordered
/// sequence of letters, cut into consecutive nonempty words.
pub fn all_raw(space: &Space, n: usize) -> Vec<Vec<Vec<Letter>>> {
    let letters: Vec<Letter> = space.letters().collect();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for seq in (0..n).map(|_| letters.iter().copied()).multi_cartesian_product() {
        for cuts in 0..(1u32 << (n - 1)) {
            let mut raw = vec![vec![seq[0]]];
            for (i, l) in seq.iter().enumerate().skip(1) {
                if cuts & (1 << (i - 1)) != 0 {
                    raw.push(Vec::new());
                }
                raw.last_mut().unwrap().push(*l);
            }
            out.push(raw);
        }
    }
    out
}
