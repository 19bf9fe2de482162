//! Graded generators, canonical words and sentences, and linear
//! combinations of sentences.
//!
//! A word is a graded-commutative monomial in `SV`, stored with its letters
//! sorted. A sentence is a graded-commutative product of words in `EV`,
//! stored with its words sorted. Both orders are total and fixed: shorter
//! first, then lexicographic. Rearranging odd elements past each other
//! costs a sign; a repeated odd element makes the monomial vanish.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Parity::Even),
            1 => Ok(Parity::Odd),
            _ => Err(Error::Parse(format!("parity must be 0 or 1, got {v}"))),
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_odd(self.is_odd() != rhs.is_odd())
    }
}

impl Serialize for Parity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Parity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Parity::from_u8(u8::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_negative(neg: bool) -> Self {
        if neg {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// `(-1)^(a*b)`.
    pub fn koszul(a: Parity, b: Parity) -> Self {
        Sign::from_negative(a.is_odd() && b.is_odd())
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn apply<C: Scalar>(self, c: C) -> C {
        match self {
            Sign::Plus => c,
            Sign::Minus => c.negated(),
        }
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_negative(self.is_minus() != rhs.is_minus())
    }
}

/// Koszul sign of reordering a sequence with the given parities.
///
/// `order[j]` is the original position of the element that ends up at
/// position `j`.
pub fn koszul_sign(order: &[usize], odd: &[bool]) -> Sign {
    let mut neg = false;
    for j in 0..order.len() {
        if !odd[order[j]] {
            continue;
        }
        for k in j + 1..order.len() {
            if odd[order[k]] && order[j] > order[k] {
                neg = !neg;
            }
        }
    }
    Sign::from_negative(neg)
}

/// Sorts `items`, returning the Koszul sign of the sort, or `None` when an
/// odd item occurs twice.
pub fn sort_with_sign<T: Ord>(items: &mut [T], odd: impl Fn(&T) -> bool) -> Option<Sign> {
    let mut neg = false;
    for j in 0..items.len() {
        if !odd(&items[j]) {
            continue;
        }
        for k in j + 1..items.len() {
            if odd(&items[k]) && items[j] > items[k] {
                neg = !neg;
            }
        }
    }
    items.sort();
    for pair in items.windows(2) {
        if pair[0] == pair[1] && odd(&pair[0]) {
            return None;
        }
    }
    Some(Sign::from_negative(neg))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub parity: Parity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(default)]
    pub weight: Rational,
}

impl Generator {
    pub fn new(id: impl Into<String>, parity: Parity) -> Self {
        Generator {
            id: id.into(),
            parity,
            degree: None,
            weight: Rational::zero(),
        }
    }

    pub fn with_weight(mut self, w: Rational) -> Self {
        self.weight = w;
        self
    }
}

/// A generator occurrence. Letters compare by generator index, which
/// follows the lexicographic order of generator ids.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    index: u32,
    odd: bool,
}

impl Letter {
    pub fn index(self) -> u32 {
        self.index
    }

    pub fn is_odd(self) -> bool {
        self.odd
    }

    pub fn parity(self) -> Parity {
        Parity::from_odd(self.odd)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}{}", self.index, if self.odd { "'" } else { "" })
    }
}

/// Ordered generator table of a graded vector space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    generators: Vec<Generator>,
    index: BTreeMap<String, u32>,
}

impl Space {
    pub fn new(mut generators: Vec<Generator>) -> Result<Self> {
        generators.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = BTreeMap::new();
        for (i, g) in generators.iter().enumerate() {
            if g.id.is_empty() {
                return Err(Error::Parse("empty generator id".into()));
            }
            if index.insert(g.id.clone(), i as u32).is_some() {
                return Err(Error::Parse(format!("duplicate generator id {:?}", g.id)));
            }
        }
        Ok(Space { generators, index })
    }

    /// The zero space, target of augmentations.
    pub fn zero() -> Self {
        Space {
            generators: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.generators.iter().enumerate().map(|(i, g)| Letter {
            index: i as u32,
            odd: g.parity.is_odd(),
        })
    }

    pub fn letter(&self, id: &str) -> Result<Letter> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| Error::Parse(format!("unknown generator {id:?}")))?;
        Ok(Letter {
            index: i,
            odd: self.generators[i as usize].parity.is_odd(),
        })
    }

    pub fn generator(&self, l: Letter) -> &Generator {
        &self.generators[l.index as usize]
    }

    pub fn id(&self, l: Letter) -> &str {
        &self.generators[l.index as usize].id
    }

    pub fn word_weight(&self, w: &Word) -> Rational {
        let mut acc = Rational::zero();
        for l in w.letters() {
            acc += &self.generator(*l).weight;
        }
        acc
    }

    pub fn sentence_weight(&self, s: &Sentence) -> Rational {
        let mut acc = Rational::zero();
        for w in s.words() {
            acc += &self.word_weight(w);
        }
        acc
    }

    /// Parses a word given as generator ids, canonicalizing with sign.
    pub fn word(&self, ids: &[&str]) -> Result<Option<(Sign, Word)>> {
        let letters = ids.iter().map(|id| self.letter(id)).collect::<Result<Vec<_>>>()?;
        Ok(Word::from_letters(letters))
    }

    /// Canonical word from ids; errors if the monomial vanishes.
    pub fn word_nonzero(&self, ids: &[&str]) -> Result<(Sign, Word)> {
        self.word(ids)?
            .ok_or_else(|| Error::Parse(format!("word {ids:?} vanishes (repeated odd letter)")))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.letters().iter().map(|l| self.id(*l)).collect::<Vec<_>>().join("*")
    }

    pub fn format_sentence(&self, s: &Sentence) -> String {
        if s.is_empty() {
            return "()".into();
        }
        s.words()
            .iter()
            .map(|w| format!("({})", self.format_word(w)))
            .collect::<Vec<_>>()
            .join("⊙")
    }

    pub fn format_expression<C: Scalar>(&self, e: &Expression<C>) -> String {
        if e.is_zero() {
            return "0".into();
        }
        e.iter()
            .map(|(s, c)| format!("[{c:?}] {}", self.format_sentence(s)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Canonical monomial in `SV`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    odd: bool,
}

impl Word {
    pub fn empty() -> Self {
        Word {
            letters: Vec::new(),
            odd: false,
        }
    }

    pub fn single(l: Letter) -> Self {
        Word {
            letters: vec![l],
            odd: l.odd,
        }
    }

    /// Sorts letters into canonical order. `None` if the monomial vanishes.
    pub fn from_letters(mut letters: Vec<Letter>) -> Option<(Sign, Word)> {
        let sign = sort_with_sign(&mut letters, |l| l.odd)?;
        let odd = letters.iter().filter(|l| l.odd).count() % 2 == 1;
        Some((sign, Word { letters, odd }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_odd(self.odd)
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.letters)
    }
}

/// Canonical product of words in `EV`. The empty sentence is the unit of
/// `SSV`; the sentence holding one empty word is the unit `1` of `EV`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    words: Vec<Word>,
    odd: bool,
}

impl Sentence {
    pub fn empty() -> Self {
        Sentence {
            words: Vec::new(),
            odd: false,
        }
    }

    /// The sentence `(1)`: one empty word.
    pub fn unit() -> Self {
        Sentence {
            words: vec![Word::empty()],
            odd: false,
        }
    }

    pub fn single(w: Word) -> Self {
        let odd = w.odd;
        Sentence {
            words: vec![w],
            odd,
        }
    }

    /// Sorts words into canonical order. `None` if the product vanishes.
    pub fn from_words(mut words: Vec<Word>) -> Option<(Sign, Sentence)> {
        let sign = sort_with_sign(&mut words, |w| w.odd)?;
        let odd = words.iter().filter(|w| w.odd).count() % 2 == 1;
        Some((sign, Sentence { words, odd }))
    }

    /// Canonicalizes an arbitrary letter-level representative.
    pub fn from_raw(raw: &[Vec<Letter>]) -> Option<(Sign, Sentence)> {
        let mut sign = Sign::Plus;
        let mut words = Vec::with_capacity(raw.len());
        for r in raw {
            let (s, w) = Word::from_letters(r.clone())?;
            sign = sign * s;
            words.push(w);
        }
        let (s, sentence) = Sentence::from_words(words)?;
        Some((sign * s, sentence))
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_odd(self.odd)
    }

    pub fn letter_count(&self) -> usize {
        self.words.iter().map(Word::len).sum()
    }

    /// True when every word is the empty word (and there is at least one).
    pub fn is_scalar(&self) -> bool {
        !self.words.is_empty() && self.words.iter().all(Word::is_empty)
    }

    pub fn to_raw(&self) -> Vec<Vec<Letter>> {
        self.words.iter().map(|w| w.letters.clone()).collect()
    }

    /// Graded-commutative product of two sentences.
    pub fn odot(&self, other: &Sentence) -> Option<(Sign, Sentence)> {
        let mut words = self.words.clone();
        words.extend(other.words.iter().cloned());
        Sentence::from_words(words)
    }
}

impl Ord for Sentence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.cmp(&other.words))
    }
}

impl PartialOrd for Sentence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.words)
    }
}

/// Finite linear combination of canonical sentences.
#[derive(Clone, PartialEq)]
pub struct Expression<C> {
    terms: BTreeMap<Sentence, C>,
}

impl<C: Scalar> Default for Expression<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> Expression<C> {
    pub fn zero() -> Self {
        Expression {
            terms: BTreeMap::new(),
        }
    }

    pub fn term(s: Sentence, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(s, c);
        e
    }

    /// `1` in `EV`.
    pub fn unit() -> Self {
        Self::term(Sentence::unit(), C::one())
    }

    /// Builds from a letter-level representative, applying its Koszul sign.
    pub fn from_raw(raw: &[Vec<Letter>], c: C) -> Self {
        match Sentence::from_raw(raw) {
            Some((sign, s)) => Self::term(s, sign.apply(c)),
            None => Self::zero(),
        }
    }

    pub fn add_term(&mut self, s: Sentence, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(s) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().plus(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_signed(&mut self, s: Sentence, sign: Sign, c: C) {
        self.add_term(s, sign.apply(c));
    }

    pub fn add_expr(&mut self, other: &Expression<C>) {
        for (s, c) in &other.terms {
            self.add_term(s.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Expression<C>, k: &C) {
        for (s, c) in &other.terms {
            self.add_term(s.clone(), c.times(k));
        }
    }

    pub fn plus(&self, other: &Expression<C>) -> Self {
        let mut out = self.clone();
        out.add_expr(other);
        out
    }

    pub fn minus(&self, other: &Expression<C>) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &C::one().negated());
        out
    }

    /// Sum that rejects coefficients from different truncation contexts.
    pub fn try_combine(&self, other: &Expression<C>) -> Result<Self> {
        for a in self.terms.values() {
            for b in other.terms.values() {
                if !a.same_context(b) {
                    return Err(Error::Config(
                        "coefficients from different truncation contexts".into(),
                    ));
                }
            }
        }
        Ok(self.plus(other))
    }

    pub fn scaled(&self, k: &C) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn negated(&self) -> Self {
        Expression {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.negated())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sentence, &C)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> &BTreeMap<Sentence, C> {
        &self.terms
    }

    pub fn coefficient(&self, s: &Sentence) -> C {
        self.terms.get(s).cloned().unwrap_or_else(C::zero)
    }

    /// `⊙` product, extended bilinearly.
    pub fn odot(&self, other: &Expression<C>) -> Self {
        let mut out = Self::zero();
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                if let Some((sign, u)) = s.odot(t) {
                    out.add_signed(u, sign, a.times(b));
                }
            }
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Sentence) -> bool) -> Self {
        Expression {
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, c)| (s.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keeps sentences with exactly `n` words.
    pub fn project_length(&self, n: usize) -> Self {
        self.filter(|s| s.len() == n)
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Expression<D> {
        let mut out = Expression::zero();
        for (s, c) in &self.terms {
            out.add_term(s.clone(), f(c));
        }
        out
    }

    /// Common parity of all sentences, `None` if mixed or zero.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(Sentence::parity);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Smallest sentence in the canonical order.
    pub fn leading(&self) -> Option<(&Sentence, &C)> {
        self.terms.iter().next()
    }

    pub fn max_sentence_len(&self) -> usize {
        self.terms.keys().map(Sentence::len).max().unwrap_or(0)
    }
}

impl<C: Scalar> fmt::Debug for Expression<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(s, c)| format!("[{c:?}]{s:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Scalar> FromIterator<(Sentence, C)> for Expression<C> {
    fn from_iter<I: IntoIterator<Item = (Sentence, C)>>(iter: I) -> Self {
        let mut e = Self::zero();
        for (s, c) in iter {
            e.add_term(s, c);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> Space {
        Space::new(vec![
            Generator::new("a", Parity::Odd),
            Generator::new("b", Parity::Odd),
            Generator::new("c", Parity::Even),
        ])
        .unwrap()
    }

    #[test]
    fn generators_sorted_by_id() {
        let s = Space::new(vec![Generator::new("z", Parity::Even), Generator::new("a", Parity::Odd)])
            .unwrap();
        assert_eq!(s.generators()[0].id, "a");
        assert!(Space::new(vec![Generator::new("a", Parity::Odd), Generator::new("a", Parity::Odd)])
            .is_err());
    }

    #[test]
    fn odd_letters_anticommute() {
        let s = space();
        let (sign, w) = s.word_nonzero(&["b", "a"]).unwrap();
        assert_eq!(sign, Sign::Minus);
        assert_eq!(s.format_word(&w), "a*b");
        let (sign, _) = s.word_nonzero(&["c", "a"]).unwrap();
        assert_eq!(sign, Sign::Plus);
        assert!(s.word(&["a", "c", "a"]).unwrap().is_none());
    }

    #[test]
    fn odd_words_anticommute_in_sentences() {
        let s = space();
        let a = s.word_nonzero(&["a"]).unwrap().1;
        let b = s.word_nonzero(&["b"]).unwrap().1;
        let (sign, _) = Sentence::from_words(vec![b.clone(), a.clone()]).unwrap();
        assert_eq!(sign, Sign::Minus);
        assert!(Sentence::from_words(vec![a.clone(), a]).is_none());
    }

    #[test]
    fn word_order_is_length_then_lex() {
        let s = space();
        let c = s.word_nonzero(&["c"]).unwrap().1;
        let ab = s.word_nonzero(&["a", "b"]).unwrap().1;
        let a = s.word_nonzero(&["a"]).unwrap().1;
        assert!(a < c && c < ab && Word::empty() < a);
    }

    #[test]
    fn koszul_sign_counts_odd_inversions() {
        assert_eq!(koszul_sign(&[1, 0], &[true, true]), Sign::Minus);
        assert_eq!(koszul_sign(&[1, 0], &[true, false]), Sign::Plus);
        assert_eq!(koszul_sign(&[2, 0, 1], &[true, true, true]), Sign::Plus);
    }

    #[test]
    fn expression_cancels_terms() {
        let s = space();
        let w = s.word_nonzero(&["c"]).unwrap().1;
        let mut e: Expression<Rational> = Expression::term(Sentence::single(w.clone()), Rational::one());
        e.add_term(Sentence::single(w), Rational::int(-1));
        assert!(e.is_zero());
    }
}
