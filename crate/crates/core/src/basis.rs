//! Finite bases of truncated pieces of `EV`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::scalar::Rational;
use crate::space::{Letter, Sentence, Space, Word};

/// Truncation bounds `(L, K, W, G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// Longest word `L`.
    pub max_word_len: usize,
    /// Longest sentence `K`.
    pub max_sentence_len: usize,
    /// Weight and `T`-exponent cutoff `W`.
    pub weight_cutoff: Rational,
    /// Highest power of `hbar` kept, `G`.
    pub genus_cap: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            max_word_len: 4,
            max_sentence_len: 4,
            weight_cutoff: Rational::int(3),
            genus_cap: 2,
        }
    }
}

impl Truncation {
    pub fn new(l: usize, k: usize, w: Rational, g: u32) -> Self {
        Truncation {
            max_word_len: l,
            max_sentence_len: k,
            weight_cutoff: w,
            genus_cap: g,
        }
    }

    /// Arity up to which extracted components are computed.
    pub fn extraction_arity(&self) -> usize {
        self.max_word_len.max(self.max_sentence_len)
    }
}

/// Which sentences a basis contains.
#[derive(Clone, Debug)]
pub struct BasisSpec {
    pub min_word_len: usize,
    pub max_word_len: usize,
    pub max_sentence_len: usize,
    /// Cap on the total number of letters.
    pub max_letters: Option<usize>,
    pub max_weight: Option<Rational>,
}

impl BasisSpec {
    /// Sentences of nonempty words within `(L, K, W)`.
    pub fn nonempty(t: &Truncation) -> Self {
        BasisSpec {
            min_word_len: 1,
            max_word_len: t.max_word_len,
            max_sentence_len: t.max_sentence_len,
            max_letters: None,
            max_weight: Some(t.weight_cutoff.clone()),
        }
    }

    /// `E^k V` within `(L, W)`, empty words included.
    pub fn filtration(t: &Truncation, k: usize) -> Self {
        BasisSpec {
            min_word_len: 0,
            max_word_len: t.max_word_len,
            max_sentence_len: k,
            max_letters: None,
            max_weight: Some(t.weight_cutoff.clone()),
        }
    }

    /// Bar complex `B^k V`: sentences of at most `k` single-letter words.
    pub fn bar(t: &Truncation, k: usize) -> Self {
        BasisSpec {
            min_word_len: 1,
            max_word_len: 1,
            max_sentence_len: k,
            max_letters: None,
            max_weight: Some(t.weight_cutoff.clone()),
        }
    }
}

/// Canonical nonvanishing words with length in `[min, max]`, in word order.
pub fn words(space: &Space, min: usize, max: usize, max_weight: Option<&Rational>) -> Vec<Word> {
    let letters: Vec<Letter> = space.letters().collect();
    let mut out = Vec::new();
    for len in min..=max {
        for ls in letters.iter().copied().combinations_with_replacement(len) {
            if let Some((_, w)) = Word::from_letters(ls) {
                if max_weight.map_or(true, |m| &space.word_weight(&w) <= m) {
                    out.push(w);
                }
            }
        }
    }
    out.sort();
    out
}

/// All canonical nonvanishing sentences allowed by `spec`, in sentence order.
pub fn sentences(space: &Space, spec: &BasisSpec) -> Vec<Sentence> {
    let ws = words(space, spec.min_word_len, spec.max_word_len, spec.max_weight.as_ref());
    let weights: Vec<Rational> = ws.iter().map(|w| space.word_weight(w)).collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    grow(&ws, &weights, spec, 0, &mut stack, Rational::zero(), 0, &mut out);
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn grow(
    ws: &[Word],
    weights: &[Rational],
    spec: &BasisSpec,
    from: usize,
    stack: &mut Vec<usize>,
    weight: Rational,
    letters: usize,
    out: &mut Vec<Sentence>,
) {
    if !stack.is_empty() {
        let words = stack.iter().map(|&i| ws[i].clone()).collect();
        if let Some((_, s)) = Sentence::from_words(words) {
            out.push(s);
        }
    }
    if stack.len() == spec.max_sentence_len {
        return;
    }
    for i in from..ws.len() {
        if ws[i].is_odd() && stack.last() == Some(&i) {
            continue;
        }
        let n = letters + ws[i].len();
        if spec.max_letters.map_or(false, |m| n > m) {
            continue;
        }
        let w = &weight + &weights[i];
        if spec.max_weight.as_ref().map_or(false, |m| &w > m) {
            continue;
        }
        stack.push(i);
        grow(ws, weights, spec, i, stack, w, n, out);
        stack.pop();
    }
}

/// The sentence `v_1 ⊙ ... ⊙ v_k` of single letters of a word.
pub fn spread(w: &Word) -> Option<Sentence> {
    Sentence::from_words(w.letters().iter().map(|l| Word::single(*l)).collect()).map(|(_, s)| s)
}
