//! Maurer-Cartan elements over the Novikov ring and the deformations they
//! induce on structures, morphisms and pointed maps.
//!
//! All coefficients are truncated at the weight cutoff `W`, so the
//! exponential of an element with positive `T`-valuation is a finite sum.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::assembler::{HatMap, Operator, Then};
use crate::basis::{self, BasisSpec, Truncation};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::{NovikovElem, NovikovMode, Rational, Scalar};
use crate::space::{Expression, Parity, Sentence, Space};
use crate::structures::{
    check_on_basis, check_spaces, difference, extract, verify_compat, verify_morphism, verify_pointed_hat,
    BLAlgebra, BLMorphism, PointedMap, PointedMorphism, Report, Status,
};

type N = NovikovElem;

fn truncated(e: &Expression<N>, w: &Rational) -> Expression<N> {
    e.map_coefficients(|c| c.truncate(Some(w)))
}

fn empty_sentence() -> Expression<N> {
    Expression::term(Sentence::empty(), N::one())
}

/// Single-expression outcome as a report: pass when `residue` vanishes.
fn report_of(residue: Expression<N>) -> Report<N> {
    if residue.is_zero() {
        Report {
            status: Status::Pass,
            checked: 1,
            witness: None,
            residue: None,
            note: None,
        }
    } else {
        Report {
            status: Status::Fail,
            checked: 1,
            witness: residue.leading().map(|(s, _)| s.clone()),
            residue: Some(residue),
            note: None,
        }
    }
}

/// An even element of `SV` with coefficients in the Novikov ring: a
/// nonconstant part of positive `T`-valuation and a constant term.
#[derive(Clone, Debug)]
pub struct MCElement {
    value: Expression<N>,
    constant: N,
}

impl MCElement {
    pub fn new(x: &Expression<N>, t: &Truncation) -> Result<Self> {
        let w = &t.weight_cutoff;
        let mut value = Expression::zero();
        let mut constant = N::zero().truncate(Some(w));
        for (s, c) in x.iter() {
            if s.len() != 1 {
                return Err(Error::Parse("an MC element is a sum of single words".into()));
            }
            if c.mode() != NovikovMode::Ring {
                return Err(Error::Config("MC coefficients must lie in the Novikov ring".into()));
            }
            let c = c.truncate(Some(w));
            if c.is_zero() {
                continue;
            }
            if s.words()[0].is_empty() {
                constant = constant.plus(&c);
                continue;
            }
            if s.parity().is_odd() {
                return Err(Error::Config("MC elements are even".into()));
            }
            if !c.valuation().is_some_and(Rational::is_positive) {
                return Err(Error::Config("nonconstant MC terms need positive T-valuation".into()));
            }
            value.add_term(s.clone(), c);
        }
        Ok(MCElement { value, constant })
    }

    pub fn zero(t: &Truncation) -> Self {
        MCElement {
            value: Expression::zero(),
            constant: N::zero().truncate(Some(&t.weight_cutoff)),
        }
    }

    /// The nonconstant part.
    pub fn value(&self) -> &Expression<N> {
        &self.value
    }

    pub fn constant(&self) -> &N {
        &self.constant
    }

    pub fn with_constant(mut self, c: N) -> Self {
        self.constant = c;
        self
    }

    /// Value plus the constant times `(1)`.
    pub fn whole(&self) -> Expression<N> {
        let mut e = self.value.clone();
        e.add_term(Sentence::unit(), self.constant.clone());
        e
    }

    /// Smallest `T`-exponent of the nonconstant part.
    pub fn min_exponent(&self) -> Option<Rational> {
        self.value.iter().filter_map(|(_, c)| c.valuation().cloned()).min()
    }
}

fn exp_series(a: &Expression<N>, max_power: Option<usize>, w: &Rational) -> Expression<N> {
    let mut total = empty_sentence();
    let mut power = empty_sentence();
    let mut i = 1usize;
    loop {
        if max_power.is_some_and(|m| i > m) {
            break;
        }
        power = truncated(&power.odot(a), w).scaled(&N::from_rational(&Rational::new(1, i as i64)));
        if power.is_zero() {
            break;
        }
        total.add_expr(&power);
        i += 1;
    }
    total
}

/// `e^a = Σ a^{⊙i} / i!`, the empty sentence being the `i = 0` term.
///
/// `a` is a sum of even single words. Its nonconstant terms need positive
/// valuation, which makes the series finite below `T^W`. A constant term of
/// valuation zero is exponentiated up to `K` factors of `(1)`.
pub fn exp_element(a: &Expression<N>, t: &Truncation) -> Result<Expression<N>> {
    let w = &t.weight_cutoff;
    let mut rest = Expression::zero();
    let mut c = N::zero();
    for (s, k) in a.iter() {
        if s.len() != 1 || s.parity().is_odd() {
            return Err(Error::Precondition("exponentials need even single-word terms".into()));
        }
        if s.words()[0].is_empty() {
            c = c.plus(k);
        } else {
            if !k.valuation().is_some_and(Rational::is_positive) {
                return Err(Error::Precondition("exponential of a term with zero valuation".into()));
            }
            rest.add_term(s.clone(), k.truncate(Some(w)));
        }
    }
    let e = exp_series(&rest, None, w);
    if c.is_zero() {
        return Ok(e);
    }
    let cap = if c.valuation().is_some_and(Rational::is_positive) {
        None
    } else {
        Some(t.max_sentence_len)
    };
    let ec = exp_series(&Expression::term(Sentence::unit(), c.truncate(Some(w))), cap, w);
    Ok(truncated(&e.odot(&ec), w))
}

/// `exp_a(x) = x ⊙ e^a`.
pub fn exp_map(a: &Expression<N>, x: &Expression<N>, t: &Truncation) -> Result<Expression<N>> {
    Ok(truncated(&x.odot(&exp_element(a, t)?), &t.weight_cutoff))
}

/// `p-hat(e^{mc} - 1) = 0` below `T^W`. The constant term factors out of
/// the exponential and does not affect the residue.
pub fn verify_mc(a: &BLAlgebra<N>, mc: &MCElement, t: &Truncation) -> Result<Report<N>> {
    let e = exp_element(mc.value(), t)?;
    let r = a.hat().apply(&e.minus(&empty_sentence()));
    Ok(report_of(truncated(&r, &t.weight_cutoff)))
}

type Inner<'a> = Box<dyn Fn(&Expression<N>) -> (Expression<N>, bool) + Sync + 'a>;

/// `s ↦ e^{-b} ⊙ inner(s ⊙ e^a)`, or `inner(s ⊙ e^a)` without `b`.
struct Twisted<'a> {
    parity: Parity,
    exp_a: Expression<N>,
    exp_neg_b: Option<Expression<N>>,
    inner: Inner<'a>,
    w: Rational,
}

impl HatMap<N> for Twisted<'_> {
    fn parity(&self) -> Parity {
        self.parity
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &N, out: &mut Expression<N>) -> bool {
        let x = truncated(&Expression::term(s.clone(), coeff.clone()).odot(&self.exp_a), &self.w);
        let (mut y, esc) = (self.inner)(&x);
        if let Some(nb) = &self.exp_neg_b {
            y = y.odot(nb);
        }
        out.add_expr(&truncated(&y, &self.w));
        esc
    }
}

/// `s ↦ s ⊙ by`.
struct Multiply {
    by: Expression<N>,
    w: Rational,
}

impl HatMap<N> for Multiply {
    fn parity(&self) -> Parity {
        self.by.parity().unwrap_or(Parity::Even)
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &N, out: &mut Expression<N>) -> bool {
        let x = Expression::term(s.clone(), coeff.clone()).odot(&self.by);
        out.add_expr(&truncated(&x, &self.w));
        false
    }
}

fn via<'a>(h: &'a dyn HatMap<N>) -> Inner<'a> {
    Box::new(move |x| h.apply_checked(x))
}

fn neg_exp(a: &Expression<N>, t: &Truncation) -> Result<Expression<N>> {
    exp_element(&a.negated(), t)
}

/// `p_{mc}` with the checks relating it to `p`.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub algebra: BLAlgebra<N>,
    /// `p_{mc}-hat = exp_{-mc} ∘ p-hat ∘ exp_{mc}`.
    pub conjugation: Report<N>,
    /// `p-hat ∘ exp_{mc} = exp_{mc} ∘ p_{mc}-hat`.
    pub intertwining: Report<N>,
    pub square_zero: Report<N>,
    /// Components extracted with the constant term included agree.
    pub constant_independent: bool,
}

impl Deformation {
    pub fn passed(&self) -> bool {
        self.conjugation.passed() && self.intertwining.passed() && self.square_zero.passed() && self.constant_independent
    }
}

/// `p_{mc}^{k,l}(v_1...v_k) = π_1 p-hat(v_1 ⊙ ... ⊙ v_k ⊙ e^{mc})`.
pub fn deformed_operator(a: &BLAlgebra<N>, mc_exp: &Expression<N>, t: &Truncation) -> Operator<N> {
    let p = a.hat();
    let tw = Twisted {
        parity: Parity::Odd,
        exp_a: mc_exp.clone(),
        exp_neg_b: None,
        inner: via(&p),
        w: t.weight_cutoff.clone(),
    };
    extract(&tw, &a.space, t.extraction_arity())
}

pub fn deform_structure(a: &BLAlgebra<N>, mc: &MCElement, t: &Truncation) -> Result<Deformation> {
    let w = t.weight_cutoff.clone();
    let e = exp_element(mc.value(), t)?;
    let op = deformed_operator(a, &e, t);
    let with_constant = deformed_operator(a, &exp_element(&mc.whole(), t)?, t);
    let constant_independent = op.entries().eq(with_constant.entries());
    let algebra = BLAlgebra::from_operator(a.space.clone(), op)?;

    let p = a.hat();
    let p_mc = algebra.hat();
    let conj = Twisted {
        parity: Parity::Odd,
        exp_a: e.clone(),
        exp_neg_b: Some(neg_exp(mc.value(), t)?),
        inner: via(&p),
        w: w.clone(),
    };
    let stacked = Twisted {
        parity: Parity::Odd,
        exp_a: e.clone(),
        exp_neg_b: None,
        inner: via(&p),
        w: w.clone(),
    };
    let mul = Multiply { by: e, w };
    let right = Then {
        first: &p_mc,
        second: &mul,
    };
    let basis = basis::sentences(&a.space, &BasisSpec::nonempty(t));
    let conjugation = check_on_basis(&basis, |s| difference(&p_mc, &conj, Parity::Even, s));
    let intertwining = check_on_basis(&basis, |s| difference(&stacked, &right, Parity::Even, s));
    let square_zero = crate::structures::verify_bl(&algebra, t);
    Ok(Deformation {
        algebra,
        conjugation,
        intertwining,
        square_zero,
        constant_independent,
    })
}

/// `φ(mc) = π_1 φ-hat(e^{mc})`, with the checks that it is MC and that
/// `e^{φ(mc)} = φ-hat(e^{mc})`.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub mc: MCElement,
    pub exp_identity: Report<N>,
    pub is_mc: Report<N>,
}

pub fn pushforward_mc(
    f: &BLMorphism<N>,
    target: &BLAlgebra<N>,
    mc: &MCElement,
    t: &Truncation,
) -> Result<Pushforward> {
    check_spaces(&f.target, &target.space, "morphism target")?;
    let w = &t.weight_cutoff;
    let e = exp_element(mc.value(), t)?;
    let image = truncated(&f.hat().apply(&e), w);
    let pushed = MCElement::new(&image.project_length(1), t)?;
    let again = exp_element(&pushed.whole(), t)?;
    let exp_identity = report_of(truncated(&again.minus(&image), w));
    let pushed = {
        let c = pushed.constant().plus(mc.constant());
        pushed.with_constant(c)
    };
    let is_mc = verify_mc(target, &pushed, t)?;
    Ok(Pushforward {
        mc: pushed,
        exp_identity,
        is_mc,
    })
}

/// `φ_{mc}` with the deformed structures on both sides.
#[derive(Clone, Debug)]
pub struct MorphismDeformation {
    pub morphism: BLMorphism<N>,
    pub pushforward: Pushforward,
    pub source: Deformation,
    pub target: Deformation,
    /// `φ_{mc}-hat = exp_{-φ(mc)} ∘ φ-hat ∘ exp_{mc}`.
    pub conjugation: Report<N>,
    /// `φ_{mc}` is a morphism `p_{mc} -> q_{φ(mc)}`.
    pub intertwining: Report<N>,
}

impl MorphismDeformation {
    pub fn passed(&self) -> bool {
        self.pushforward.exp_identity.passed()
            && self.pushforward.is_mc.passed()
            && self.source.passed()
            && self.target.passed()
            && self.conjugation.passed()
            && self.intertwining.passed()
    }
}

/// `φ_{mc}^{k,l}(v_1...v_k) = π_1 φ-hat(v_1 ⊙ ... ⊙ v_k ⊙ e^{mc})`.
pub fn deform_morphism(
    f: &BLMorphism<N>,
    source: &BLAlgebra<N>,
    target: &BLAlgebra<N>,
    mc: &MCElement,
    t: &Truncation,
) -> Result<MorphismDeformation> {
    check_spaces(&f.source, &source.space, "morphism source")?;
    check_spaces(&f.target, &target.space, "morphism target")?;
    let w = t.weight_cutoff.clone();
    let pushforward = pushforward_mc(f, target, mc, t)?;
    let src = deform_structure(source, mc, t)?;
    let tgt = deform_structure(target, &pushforward.mc, t)?;
    let e = exp_element(mc.value(), t)?;
    let phi = f.hat();
    let stacked = Twisted {
        parity: Parity::Even,
        exp_a: e.clone(),
        exp_neg_b: None,
        inner: via(&phi),
        w: w.clone(),
    };
    let op = extract(&stacked, &source.space, t.extraction_arity());
    let morphism = BLMorphism::from_operator(source.space.clone(), target.space.clone(), op)?;
    let conj = Twisted {
        parity: Parity::Even,
        exp_a: e,
        exp_neg_b: Some(neg_exp(&pushforward.mc.whole(), t)?),
        inner: via(&phi),
        w,
    };
    let basis = basis::sentences(&source.space, &BasisSpec::nonempty(t));
    let f_mc = morphism.hat();
    let conjugation = check_on_basis(&basis, |s| difference(&f_mc, &conj, Parity::Even, s));
    let intertwining = verify_morphism(&morphism, &src.algebra, &tgt.algebra, t)?;
    Ok(MorphismDeformation {
        morphism,
        pushforward,
        source: src,
        target: tgt,
        conjugation,
        intertwining,
    })
}

fn check_mcdot(mcdot: &Expression<N>, parity: Parity) -> Result<()> {
    for (s, _) in mcdot.iter() {
        if s.len() != 1 {
            return Err(Error::Parse("a pointed MC element is a sum of single words".into()));
        }
        if s.parity() != parity {
            return Err(Error::Config("pointed MC element must have parity |p•| + 1".into()));
        }
    }
    Ok(())
}

/// `p•-hat(e^{mc} - 1) = p_{mc}-hat(mc•)`.
pub fn verify_pointed_mc(
    a: &BLAlgebra<N>,
    pdot: &PointedMap<N>,
    mc: &MCElement,
    mcdot: &Expression<N>,
    t: &Truncation,
) -> Result<Report<N>> {
    check_spaces(&pdot.space, &a.space, "pointed map")?;
    check_mcdot(mcdot, pdot.parity + Parity::Odd)?;
    let w = t.weight_cutoff.clone();
    let e = exp_element(mc.value(), t)?;
    let lhs = pdot.hat().apply(&e.minus(&empty_sentence()));
    let p = a.hat();
    let conj = Twisted {
        parity: Parity::Odd,
        exp_a: e,
        exp_neg_b: Some(neg_exp(mc.value(), t)?),
        inner: via(&p),
        w: w.clone(),
    };
    let rhs = conj.apply(&truncated(mcdot, &w));
    Ok(report_of(truncated(&lhs.minus(&rhs), &w)))
}

/// `p•_{mc,mc•}` with its checks.
#[derive(Clone, Debug)]
pub struct PointedDeformation {
    pub map: PointedMap<N>,
    pub deformation: Deformation,
    /// `p•_{mc,mc•}` commutes with `p_{mc}` up to sign.
    pub relation: Report<N>,
    /// Its hat equals `exp_{-mc} ∘ (p•-hat - [p-hat, mc• ⊙]) ∘ exp_{mc}`.
    pub conjugation: Report<N>,
}

impl PointedDeformation {
    pub fn passed(&self) -> bool {
        self.deformation.passed() && self.relation.passed() && self.conjugation.passed()
    }
}

/// `p•_{mc,mc•}^{k,l}(v) = π_1 (p•-hat(v ⊙ e^{mc}) - p-hat(mc• ⊙ v ⊙ e^{mc}))`.
pub fn deform_pointed(
    a: &BLAlgebra<N>,
    pdot: &PointedMap<N>,
    mc: &MCElement,
    mcdot: &Expression<N>,
    t: &Truncation,
) -> Result<PointedDeformation> {
    check_spaces(&pdot.space, &a.space, "pointed map")?;
    let mc_parity = pdot.parity + Parity::Odd;
    check_mcdot(mcdot, mc_parity)?;
    let w = t.weight_cutoff.clone();
    let mcdot = truncated(mcdot, &w);
    let deformation = deform_structure(a, mc, t)?;
    let e = exp_element(mc.value(), t)?;
    let p = a.hat();
    let dot = pdot.hat();
    let inner = |x: &Expression<N>| {
        let (mut y, e1) = dot.apply_checked(x);
        let (z, e2) = p.apply_checked(&mcdot.odot(x));
        y.add_scaled(&z, &N::one().negated());
        (y, e1 || e2)
    };
    let stacked = Twisted {
        parity: pdot.parity,
        exp_a: e.clone(),
        exp_neg_b: None,
        inner: Box::new(inner),
        w: w.clone(),
    };
    let op = extract(&stacked, &a.space, t.extraction_arity());
    let map = PointedMap::from_operator(a.space.clone(), op)?;

    let commutator = |x: &Expression<N>| {
        let (mut y, esc) = inner(x);
        let (px, e3) = p.apply_checked(x);
        let k = if mc_parity.is_odd() { N::one().negated() } else { N::one() };
        y.add_scaled(&mcdot.odot(&px), &k);
        (y, esc || e3)
    };
    let conj = Twisted {
        parity: pdot.parity,
        exp_a: e,
        exp_neg_b: Some(neg_exp(mc.value(), t)?),
        inner: Box::new(commutator),
        w,
    };
    let basis = basis::sentences(&a.space, &BasisSpec::nonempty(t));
    let dot_mc = map.hat();
    let conjugation = check_on_basis(&basis, |s| difference(&dot_mc, &conj, Parity::Even, s));
    let relation = verify_pointed_hat(&dot_mc, &deformation.algebra.hat(), &a.space, t);
    Ok(PointedDeformation {
        map,
        deformation,
        relation,
        conjugation,
    })
}

/// Pointed MC data pushed along a compatible pair `(φ, φ•)`.
#[derive(Clone, Debug)]
pub struct InducedPointed {
    pub morphism: MorphismDeformation,
    /// `mc'• = π_1 (φ•-hat(e^{mc}) + φ-hat(mc• ⊙ e^{mc}))`.
    pub mcdot: Expression<N>,
    /// `mc'•` is pointed MC for `(q, q•, φ(mc))`.
    pub is_pointed_mc: Report<N>,
    pub pointed_morphism: PointedMorphism<N>,
    pub source_pointed: PointedDeformation,
    pub target_pointed: PointedDeformation,
    /// The deformed quadruple is compatible.
    pub compat: Report<N>,
}

impl InducedPointed {
    pub fn passed(&self) -> bool {
        self.morphism.passed()
            && self.is_pointed_mc.passed()
            && self.source_pointed.passed()
            && self.target_pointed.passed()
            && self.compat.passed()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn induced_pointed_mc(
    f: &BLMorphism<N>,
    fdot: &PointedMorphism<N>,
    source: &BLAlgebra<N>,
    target: &BLAlgebra<N>,
    pdot: &PointedMap<N>,
    qdot: &PointedMap<N>,
    mc: &MCElement,
    mcdot: &Expression<N>,
    t: &Truncation,
) -> Result<InducedPointed> {
    check_spaces(&fdot.source, &source.space, "pointed morphism source")?;
    check_spaces(&fdot.target, &target.space, "pointed morphism target")?;
    check_mcdot(mcdot, pdot.parity + Parity::Odd)?;
    let w = t.weight_cutoff.clone();
    let mcdot = truncated(mcdot, &w);
    let morphism = deform_morphism(f, source, target, mc, t)?;
    let e = exp_element(mc.value(), t)?;
    let phi = f.hat();
    let phi_dot = fdot.hat(f);
    let inner = |x: &Expression<N>| {
        let (mut y, e1) = phi_dot.apply_checked(x);
        let (z, e2) = phi.apply_checked(&mcdot.odot(x));
        y.add_expr(&z);
        (y, e1 || e2)
    };
    let (image, _) = inner(&e);
    let new_dot = truncated(&image, &w).project_length(1);
    let is_pointed_mc = verify_pointed_mc(target, qdot, &morphism.pushforward.mc, &new_dot, t)?;

    let stacked = Twisted {
        parity: fdot.parity,
        exp_a: e,
        exp_neg_b: None,
        inner: Box::new(inner),
        w,
    };
    let op = extract(&stacked, &source.space, t.extraction_arity());
    let pointed_morphism = PointedMorphism::from_operator(source.space.clone(), target.space.clone(), op)?;
    let source_pointed = deform_pointed(source, pdot, mc, &mcdot, t)?;
    let target_pointed = deform_pointed(target, qdot, &morphism.pushforward.mc, &new_dot, t)?;
    let compat = verify_compat(
        &morphism.morphism,
        &pointed_morphism,
        &morphism.source.algebra,
        &morphism.target.algebra,
        &source_pointed.map,
        &target_pointed.map,
        t,
    )?;
    Ok(InducedPointed {
        morphism,
        mcdot: new_dot,
        is_pointed_mc,
        pointed_morphism,
        source_pointed,
        target_pointed,
        compat,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct StratumKey(Sentence, Rational);

fn strata(e: &Expression<N>, shift: &Rational, w: &Rational, out: &mut SparseVec<StratumKey>) {
    for (s, c) in e.iter() {
        for (k, x) in c.terms() {
            let ex = x + shift;
            if &ex < w {
                let slot = out.entry(StratumKey(s.clone(), ex)).or_insert_with(Rational::zero);
                *slot += k;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
}

/// Solves `p_{mc}-hat(mc•) = p•-hat(e^{mc} - 1)` for `mc•` among words of
/// length `<= L` with exponents on the grid `g Z ∩ [0, W)`, `g` the gcd of
/// the exponents in the data. Free unknowns are set to zero.
pub fn solve_pointed_mc(
    a: &BLAlgebra<N>,
    pdot: &PointedMap<N>,
    mc: &MCElement,
    t: &Truncation,
) -> Result<Option<Expression<N>>> {
    check_spaces(&pdot.space, &a.space, "pointed map")?;
    let w = t.weight_cutoff.clone();
    let mut exps: Vec<Rational> = Vec::new();
    for op in [a.operator(), pdot.operator()] {
        for (_, poly) in op.entries() {
            for c in poly.values() {
                exps.extend(c.terms().iter().map(|(_, e)| e.clone()));
            }
        }
    }
    for (_, c) in mc.value().iter() {
        exps.extend(c.terms().iter().map(|(_, e)| e.clone()));
    }
    let g = Rational::gcd_of(exps.iter().filter(|e| !e.is_zero())).unwrap_or_else(Rational::one);
    let mut grid = Vec::new();
    let mut x = Rational::zero();
    while x < w {
        grid.push(x.clone());
        x = &x + &g;
    }

    let parity = pdot.parity + Parity::Odd;
    let words: Vec<_> = basis::words(&a.space, 1, t.max_word_len, None)
        .into_iter()
        .filter(|v| v.parity() == parity)
        .collect();
    let e = exp_element(mc.value(), t)?;
    let p = a.hat();
    let conj = Twisted {
        parity: Parity::Odd,
        exp_a: e.clone(),
        exp_neg_b: Some(neg_exp(mc.value(), t)?),
        inner: via(&p),
        w: w.clone(),
    };
    let images: Vec<Expression<N>> = words
        .par_iter()
        .map(|v| conj.apply_sentence(&Sentence::single(v.clone())))
        .collect();
    let mut ech = Echelon::new();
    let mut unknowns = Vec::new();
    for (i, img) in images.iter().enumerate() {
        for shift in &grid {
            let mut col = BTreeMap::new();
            strata(img, shift, &w, &mut col);
            ech.push(col);
            unknowns.push((i, shift.clone()));
        }
    }
    let rhs = pdot.hat().apply(&e.minus(&empty_sentence()));
    let mut target = BTreeMap::new();
    strata(&rhs, &Rational::zero(), &w, &mut target);
    let Some(sol) = ech.solve(&target) else {
        return Ok(None);
    };
    let mut out = Expression::zero();
    for ((i, shift), c) in unknowns.iter().zip(sol) {
        if !c.is_zero() {
            let k = NovikovElem::new([(c, shift.clone())], Some(w.clone()), NovikovMode::Ring)?;
            out.add_term(Sentence::single(words[*i].clone()), k);
        }
    }
    if !verify_pointed_mc(a, pdot, mc, &out, t)?.passed() {
        return Err(Error::Internal("pointed MC solution failed its re-check".into()));
    }
    Ok(Some(out))
}

/// Weight defects `T-exponent + weight(out) - weight(in)` of every term.
pub fn weight_defects(op: &Operator<N>, source: &Space, target: &Space) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for (input, poly) in op.entries() {
        let win = source.word_weight(input);
        for (o, c) in poly {
            let base = &target.word_weight(o) - &win;
            for (_, e) in c.terms() {
                out.insert(&base + e);
            }
        }
    }
    out
}

/// For a weight-homogeneous operator, checks that every defect of its
/// deformation lies in the additive monoid generated by the defects
/// `weight(w) + a` of the MC terms `T^a w`. `None` when the original is not
/// homogeneous or some generator is not positive.
pub fn weight_accounting(
    original: &Operator<N>,
    deformed: &Operator<N>,
    source: &Space,
    target: &Space,
    mc: &MCElement,
) -> Option<bool> {
    let base = weight_defects(original, source, target);
    if base.iter().any(|d| !d.is_zero()) {
        return None;
    }
    let mut gens = BTreeSet::new();
    for (s, c) in mc.value().iter() {
        let ws = source.word_weight(&s.words()[0]);
        for (_, e) in c.terms() {
            gens.insert(&ws + e);
        }
    }
    if gens.iter().any(|g| !g.is_positive()) {
        return None;
    }
    let defects = weight_defects(deformed, source, target);
    let Some(top) = defects.iter().next_back().cloned() else {
        return Some(true);
    };
    let mut reach: BTreeSet<Rational> = BTreeSet::from([Rational::zero()]);
    let mut frontier = vec![Rational::zero()];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y = &x + g;
            if y <= top && reach.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    Some(defects.iter().all(|d| reach.contains(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Generator;

    fn q(n: i64) -> Rational {
        Rational::int(n)
    }

    fn toy() -> (BLAlgebra<N>, Space) {
        let space = Space::new(vec![
            Generator::new("x", Parity::Odd),
            Generator::new("y", Parity::Even),
            Generator::new("z", Parity::Even),
        ])
        .unwrap();
        let mut op = Operator::new(Parity::Odd);
        let (_, xy) = space.word_nonzero(&["x", "y"]).unwrap();
        let (_, z) = space.word_nonzero(&["z"]).unwrap();
        op.add(&xy, z, N::one());
        (BLAlgebra::from_operator(space.clone(), op).unwrap(), space)
    }

    fn word_expr(space: &Space, ids: &[&str], c: N) -> Expression<N> {
        let (sign, w) = space.word_nonzero(ids).unwrap();
        Expression::term(Sentence::single(w), sign.apply(c))
    }

    #[test]
    fn exponential_truncates() {
        let (_, space) = toy();
        let t = Truncation::new(3, 3, q(3), 0);
        let a = word_expr(&space, &["y"], N::monomial(q(1), q(1)));
        let e = exp_element(&a, &t).unwrap();
        // 1 + T y + T^2 y⊙y / 2
        assert_eq!(e.len(), 3);
    }

    #[test]
    fn toy_deformation() {
        let (alg, space) = toy();
        let t = Truncation::new(2, 2, q(3), 0);
        let mc = MCElement::new(&word_expr(&space, &["y"], N::monomial(q(1), q(1))), &t).unwrap();
        assert!(verify_mc(&alg, &mc, &t).unwrap().passed());
        let d = deform_structure(&alg, &mc, &t).unwrap();
        assert!(d.passed(), "{d:?}");
        let (_, x) = space.word_nonzero(&["x"]).unwrap();
        let (_, z) = space.word_nonzero(&["z"]).unwrap();
        let got = d.algebra.operator().get(&x).and_then(|p| p.get(&z)).cloned().unwrap();
        assert_eq!(got.truncate(Some(&q(3))), N::monomial(q(1), q(1)).truncate(Some(&q(3))));
    }
}
