//! Torsion, order and their variants as exact linear solves over truncated
//! bases. Every returned witness is re-checked before it is handed out.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::assembler::{HatMap, Operator};
use crate::basis::{self, BasisSpec, Truncation};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::{NovikovElem, NovikovMode, Rational, Scalar};
use crate::space::{Expression, Sentence};
use crate::structures::{
    check_spaces, compose, verify_augmentation, verify_bl, verify_compat, verify_pointed, Augmentation,
    BLAlgebra, BLMorphism, Conjugate, MultiPointedMap, PointedMap, PointedMorphism, Status,
};

/// Outcome of a bounded search.
#[derive(Clone, Debug)]
pub enum Search<C: Scalar> {
    /// First level `k` at which the system is solvable.
    Found { k: usize, witness: Expression<C> },
    /// No solution at any level within the bounds.
    NotFound { bounds: Truncation },
}

impl<C: Scalar> Search<C> {
    pub fn k(&self) -> Option<usize> {
        match self {
            Search::Found { k, .. } => Some(*k),
            Search::NotFound { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&Expression<C>> {
        match self {
            Search::Found { witness, .. } => Some(witness),
            Search::NotFound { .. } => None,
        }
    }
}

/// Torsion search result; torsion is `k - 1` when found at level `k`.
pub type TorsionResult = Search<Rational>;
pub type OrderResult = Search<Rational>;

pub fn torsion_value(r: &TorsionResult) -> Option<usize> {
    r.k().map(|k| k - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Row {
    Functional,
    Term(Sentence),
}

fn as_sparse(e: &Expression<Rational>) -> SparseVec<Row> {
    e.iter().map(|(s, c)| (Row::Term(s.clone()), c.clone())).collect()
}

/// Solves `Σ c_j column(basis_j) = target` and returns `Σ c_j basis_j`.
fn solve_on<R, F>(basis: &[Sentence], column: F, target: &SparseVec<R>) -> Option<Expression<Rational>>
where
    R: Ord + Clone + Send,
    F: Fn(&Sentence) -> SparseVec<R> + Sync + Send,
{
    let cols: Vec<SparseVec<R>> = basis.par_iter().map(column).collect();
    let mut e = Echelon::new();
    for c in cols {
        e.push(c);
    }
    let x = e.solve(target)?;
    Some(
        basis
            .iter()
            .zip(x)
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| (s.clone(), c))
            .collect(),
    )
}

fn require(report_ok: bool, what: &str) -> Result<()> {
    if report_ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} does not verify within the truncation")))
    }
}

/// `T(V)`: the least `k` with `p-hat(x) = 1` solvable in `E^k V`.
pub fn torsion(a: &BLAlgebra<Rational>, t: &Truncation) -> Result<TorsionResult> {
    require(verify_bl(a, t).passed(), "the algebra")?;
    let hat = a.hat();
    let unit = Expression::<Rational>::unit();
    let target = as_sparse(&unit);
    for k in 1..=t.max_sentence_len {
        let basis = basis::sentences(&a.space, &BasisSpec::filtration(t, k));
        if let Some(x) = solve_on(&basis, |s| as_sparse(&hat.apply_sentence(s)), &target) {
            if hat.apply(&x) != unit || x.max_sentence_len() > k {
                return Err(Error::Internal("torsion witness failed its re-check".into()));
            }
            return Ok(Search::Found { k, witness: x });
        }
    }
    Ok(Search::NotFound { bounds: t.clone() })
}

/// Re-checks `p-hat(x) = 1` with `x` in `E^k V`.
pub fn check_torsion_witness(a: &BLAlgebra<Rational>, x: &Expression<Rational>, k: usize) -> bool {
    x.max_sentence_len() <= k && a.hat().apply(x) == Expression::unit()
}

/// Pushes a torsion witness of the source through `phi-hat`; the image is a
/// torsion witness of the target at the same level.
pub fn push_torsion_witness(
    f: &BLMorphism<Rational>,
    source: &BLAlgebra<Rational>,
    target: &BLAlgebra<Rational>,
    x: &Expression<Rational>,
    k: usize,
) -> Result<Expression<Rational>> {
    check_spaces(&f.source, &source.space, "morphism source")?;
    check_spaces(&f.target, &target.space, "morphism target")?;
    if !check_torsion_witness(source, x, k) {
        return Err(Error::Precondition("not a torsion witness of the source".into()));
    }
    let y = f.hat().apply(x);
    if !check_torsion_witness(target, &y, k) {
        return Err(Error::Internal("pushed witness failed its re-check".into()));
    }
    Ok(y)
}

/// `ell-hat_epsilon`: `p-hat_epsilon` on the bar complex, keeping only
/// sentences of single letters.
pub fn ell(p_eps: &dyn HatMap<Rational>, x: &Expression<Rational>) -> Expression<Rational> {
    p_eps.apply(x).filter(|s| s.words().iter().all(|w| w.len() == 1))
}

/// `pi_Q`: the coefficient of the unit sentence.
pub fn pi_q<C: Scalar>(e: &Expression<C>) -> C {
    e.coefficient(&Sentence::unit())
}

fn order_preconditions(
    a: &BLAlgebra<Rational>,
    eps: &Augmentation<Rational>,
    pt: &PointedMap<Rational>,
    t: &Truncation,
) -> Result<()> {
    require(verify_bl(a, t).passed(), "the algebra")?;
    require(verify_augmentation(eps, a, t)?.passed(), "the augmentation")?;
    require(verify_pointed(pt, a, t)?.passed(), "the pointed map")
}

/// Joint solve of `d(x) = 0` and `functional(x) = 1` over increasing bases.
fn order_search<D, G>(levels: impl Iterator<Item = (usize, Vec<Sentence>)>, d: D, functional: G, t: &Truncation) -> Result<OrderResult>
where
    D: Fn(&Sentence) -> Expression<Rational> + Sync + Send,
    G: Fn(&Sentence) -> Rational + Sync + Send,
{
    let mut target = SparseVec::new();
    target.insert(Row::Functional, Rational::one());
    for (k, basis) in levels {
        let column = |s: &Sentence| {
            let mut col = as_sparse(&d(s));
            let v = functional(s);
            if !v.is_zero() {
                col.insert(Row::Functional, v);
            }
            col
        };
        if let Some(x) = solve_on(&basis, column, &target) {
            let mut dx = Expression::zero();
            let mut fx = Rational::zero();
            for (s, c) in x.iter() {
                dx.add_scaled(&d(s), c);
                fx = &fx + &(c * &functional(s));
            }
            if !dx.is_zero() || !fx.is_one() {
                return Err(Error::Internal("order witness failed its re-check".into()));
            }
            return Ok(Search::Found { k, witness: x });
        }
    }
    Ok(Search::NotFound { bounds: t.clone() })
}

/// `O(V, epsilon, p_•)` over `S̄^k V`, realized as sentences of at most `k`
/// single letters, for `k <= L`.
pub fn order(
    a: &BLAlgebra<Rational>,
    eps: &Augmentation<Rational>,
    pt: &PointedMap<Rational>,
    t: &Truncation,
) -> Result<OrderResult> {
    order_preconditions(a, eps, pt, t)?;
    let p = a.hat();
    let dot = pt.hat();
    let p_eps = Conjugate::new(eps, &p);
    let dot_eps = Conjugate::new(eps, &dot);
    let levels = (1..=t.max_word_len).map(|k| (k, basis::sentences(&a.space, &BasisSpec::bar(t, k))));
    order_search(
        levels,
        |s| ell(&p_eps, &Expression::term(s.clone(), Rational::one())),
        |s| pi_q(&dot_eps.apply_sentence(s)),
        t,
    )
}

/// `Õ(V, epsilon, p_•)` over sentences of at most `k` nonempty words.
pub fn tilde_order(
    a: &BLAlgebra<Rational>,
    eps: &Augmentation<Rational>,
    pt: &PointedMap<Rational>,
    t: &Truncation,
) -> Result<OrderResult> {
    order_preconditions(a, eps, pt, t)?;
    let p = a.hat();
    let dot = pt.hat();
    let p_eps = Conjugate::new(eps, &p);
    let dot_eps = Conjugate::new(eps, &dot);
    let levels = (1..=t.max_sentence_len).map(|k| {
        let mut spec = BasisSpec::nonempty(t);
        spec.max_sentence_len = k;
        (k, basis::sentences(&a.space, &spec))
    });
    order_search(levels, |s| p_eps.apply_sentence(s), |s| pi_q(&dot_eps.apply_sentence(s)), t)
}

/// `pi_m`: drops every sentence with a word longer than `m`.
pub fn pi_m<C: Scalar>(e: &Expression<C>, m: usize) -> Expression<C> {
    e.filter(|s| s.words().iter().all(|w| w.len() <= m))
}

/// Width `w(v)`: the largest `m` with `pi_m(v) = 0`.
pub fn width<C: Scalar>(e: &Expression<C>) -> Option<usize> {
    e.iter()
        .map(|(s, _)| s.words().iter().map(|w| w.len()).max().unwrap_or(0))
        .min()
        .map(|m| m.saturating_sub(1))
}

/// `O(V, epsilon, p_{m•})` over sentences of at most `k` words of length at
/// most `m`.
pub fn multipoint_order(
    a: &BLAlgebra<Rational>,
    eps: &Augmentation<Rational>,
    mp: &MultiPointedMap<Rational>,
    m: usize,
    t: &Truncation,
) -> Result<OrderResult> {
    if mp.tags().len() > m {
        return Err(Error::Config(format!("{} tags exceed m = {m}", mp.tags().len())));
    }
    check_spaces(&mp.space, &a.space, "multi-pointed map")?;
    require(verify_bl(a, t).passed(), "the algebra")?;
    require(verify_augmentation(eps, a, t)?.passed(), "the augmentation")?;
    let p = a.hat();
    let dot = mp.hat();
    let p_eps = Conjugate::new(eps, &p);
    let dot_eps = Conjugate::new(eps, &dot);
    let levels = (1..=t.max_sentence_len).map(|k| {
        let mut spec = BasisSpec::nonempty(t);
        spec.max_sentence_len = k;
        spec.max_word_len = m.min(t.max_word_len);
        (k, basis::sentences(&a.space, &spec))
    });
    order_search(levels, |s| pi_m(&p_eps.apply_sentence(s), m), |s| pi_q(&dot_eps.apply_sentence(s)), t)
}

/// Smallest Novikov exponent reachable by the functional on closed classes.
#[derive(Clone, Debug)]
pub enum Spectral {
    Found { value: Rational, witness: Expression<NovikovElem> },
    NotFound { bounds: Truncation },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum StratumRow {
    Functional(Rational),
    Term(Sentence, Rational),
}

fn exponents_of(op: &Operator<NovikovElem>, out: &mut Vec<Rational>) -> Result<()> {
    for (_, poly) in op.entries() {
        for c in poly.values() {
            if c.mode() != NovikovMode::Ring {
                return Err(Error::Config("spectral invariants need Novikov ring coefficients".into()));
            }
            out.extend(c.terms().iter().map(|(_, e)| e.clone()));
        }
    }
    Ok(())
}

/// `r^{<=l}`: the least `a` with `T^a` in the image of the functional on
/// closed elements of `B̄^l S̄V`, searched on the exponent grid `g Z ∩ [0, W)`
/// where `g` is the gcd of all exponents in the data.
pub fn spectral_invariant(
    a: &BLAlgebra<NovikovElem>,
    eps: &Augmentation<NovikovElem>,
    mp: &MultiPointedMap<NovikovElem>,
    l: usize,
    t: &Truncation,
) -> Result<Spectral> {
    check_spaces(&eps.space, &a.space, "augmentation")?;
    check_spaces(&mp.space, &a.space, "multi-pointed map")?;
    let mut exps = Vec::new();
    exponents_of(a.operator(), &mut exps)?;
    exponents_of(eps.operator(), &mut exps)?;
    for (_, op) in mp.groups() {
        exponents_of(op, &mut exps)?;
    }
    let w = t.weight_cutoff.clone();
    let g = Rational::gcd_of(exps.iter().filter(|e| !e.is_zero())).unwrap_or_else(Rational::one);
    let mut grid = Vec::new();
    let mut e = Rational::zero();
    while e < w {
        grid.push(e.clone());
        e = &e + &g;
    }

    let p = a.hat();
    let dot = mp.hat();
    let p_eps = Conjugate::new(eps, &p);
    let dot_eps = Conjugate::new(eps, &dot);
    let mut spec = BasisSpec::nonempty(t);
    spec.max_sentence_len = l;
    let basis = basis::sentences(&a.space, &spec);

    // Images at exponent zero; shifted copies give the other strata.
    let images: Vec<(Expression<NovikovElem>, NovikovElem)> = basis
        .par_iter()
        .map(|s| (p_eps.apply_sentence(s), pi_q(&dot_eps.apply_sentence(s))))
        .collect();
    let mut columns = Vec::new();
    let mut unknowns = Vec::new();
    for (i, (dp, f)) in images.iter().enumerate() {
        for e in &grid {
            let mut col: SparseVec<StratumRow> = BTreeMap::new();
            for (u, c) in dp.iter() {
                for (k, x) in c.terms() {
                    let ex = x + e;
                    if ex < w {
                        *col.entry(StratumRow::Term(u.clone(), ex)).or_insert_with(Rational::zero) += k;
                    }
                }
            }
            for (k, x) in f.terms() {
                let ex = x + e;
                if ex < w {
                    *col.entry(StratumRow::Functional(ex)).or_insert_with(Rational::zero) += k;
                }
            }
            col.retain(|_, v| !v.is_zero());
            columns.push(col);
            unknowns.push((i, e.clone()));
        }
    }
    let mut ech = Echelon::new();
    for c in columns {
        ech.push(c);
    }
    for target_exp in &grid {
        let mut target = SparseVec::new();
        target.insert(StratumRow::Functional(target_exp.clone()), Rational::one());
        let Some(x) = ech.solve(&target) else { continue };
        let mut witness: Expression<NovikovElem> = Expression::zero();
        for ((i, e), c) in unknowns.iter().zip(x) {
            if !c.is_zero() {
                let coef = NovikovElem::new([(c, e.clone())], Some(w.clone()), NovikovMode::Ring)?;
                witness.add_term(basis[*i].clone(), coef);
            }
        }
        let dx = p_eps.apply(&witness);
        let fx = pi_q(&dot_eps.apply(&witness)).truncate(Some(&w));
        let expect = NovikovElem::new([(Rational::one(), target_exp.clone())], Some(w.clone()), NovikovMode::Ring)?;
        let closed = dx.iter().all(|(_, c)| c.truncate(Some(&w)).is_zero());
        if !closed || fx != expect {
            return Err(Error::Internal("spectral witness failed its re-check".into()));
        }
        return Ok(Spectral::Found {
            value: target_exp.clone(),
            witness,
        });
    }
    Ok(Spectral::NotFound { bounds: t.clone() })
}

/// Both sides of `O(V, epsilon∘phi, p_•) >= O(V', epsilon, q_•)` for a
/// compatible quadruple, after checking compatibility.
#[derive(Clone, Debug)]
pub struct Functoriality {
    pub source: OrderResult,
    pub target: OrderResult,
}

impl Functoriality {
    /// Holds when the target order is at most the source order; a missing
    /// source order is treated as unbounded.
    pub fn holds(&self) -> bool {
        match (self.source.k(), self.target.k()) {
            (Some(s), Some(t)) => s >= t,
            (Some(_), None) => false,
            (None, _) => true,
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn order_functoriality(
    f: &BLMorphism<Rational>,
    fdot: &PointedMorphism<Rational>,
    source: &BLAlgebra<Rational>,
    target: &BLAlgebra<Rational>,
    eps: &Augmentation<Rational>,
    pdot: &PointedMap<Rational>,
    qdot: &PointedMap<Rational>,
    t: &Truncation,
) -> Result<Functoriality> {
    let compat = verify_compat(f, fdot, source, target, pdot, qdot, t)?;
    if compat.status != Status::Pass {
        return Err(Error::Precondition("the quadruple is not compatible".into()));
    }
    let pulled = Augmentation::from_morphism(&compose(f, &eps.to_morphism(), t)?)?;
    Ok(Functoriality {
        source: order(source, &pulled, pdot, t)?,
        target: order(target, eps, qdot, t)?,
    })
}

/// Checks `O <= Õ`; `None` when either search found nothing.
pub fn order_le_tilde(o: &OrderResult, ot: &OrderResult) -> Option<bool> {
    Some(o.k()? <= ot.k()?)
}
