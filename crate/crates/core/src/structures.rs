//! BL-infinity algebras, morphisms, augmentations and pointed maps, with
//! verification of their defining equations on a truncated basis.

use rayon::prelude::*;

use crate::assembler::{ComponentKind, ComponentMap, HatMap, HatMulti, HatP, HatPhi, Operator, Then};
use crate::basis::{self, BasisSpec, Truncation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{Expression, Parity, Sentence, Space, Word};

fn validate_all<C: Scalar>(
    components: &[ComponentMap<C>],
    kind: &[ComponentKind],
    source: &Space,
    target: &Space,
) -> Result<()> {
    for c in components {
        if !kind.contains(&c.kind) {
            return Err(Error::Parse(format!("unexpected component kind {}", c.kind.as_str())));
        }
        c.validate(source, target)?;
    }
    Ok(())
}

/// `(V, {p^{k,l}})` with `p-hat` of parity one.
#[derive(Clone, Debug)]
pub struct BLAlgebra<C> {
    pub space: Space,
    pub components: Vec<ComponentMap<C>>,
    op: Operator<C>,
}

impl<C: Scalar> BLAlgebra<C> {
    pub fn new(space: Space, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(&components, &[ComponentKind::Structure], &space, &space)?;
        let op = Operator::from_components(Parity::Odd, &components)?;
        Ok(BLAlgebra {
            space,
            components,
            op,
        })
    }

    /// Builds from an operator table, e.g. extracted components.
    pub fn from_operator(space: Space, op: Operator<C>) -> Result<Self> {
        if op.parity() != Parity::Odd {
            return Err(Error::Config("structure maps have odd parity".into()));
        }
        let components = op.to_components(ComponentKind::Structure);
        validate_all(&components, &[ComponentKind::Structure], &space, &space)?;
        Ok(BLAlgebra {
            space,
            components,
            op,
        })
    }

    pub fn operator(&self) -> &Operator<C> {
        &self.op
    }

    pub fn hat(&self) -> HatP<C> {
        HatP::new(&self.op)
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy) -> BLAlgebra<D> {
        BLAlgebra {
            space: self.space.clone(),
            components: self.components.iter().map(|c| map_component(c, f)).collect(),
            op: self.op.map_coefficients(f),
        }
    }
}

pub(crate) fn map_component<C: Scalar, D: Scalar>(
    c: &ComponentMap<C>,
    f: impl Fn(&C) -> D,
) -> ComponentMap<D> {
    let mut out = ComponentMap::new(c.kind, c.arity, c.genus, c.shift).with_tags(c.tags.clone());
    for (input, poly) in &c.support {
        for (w, k) in poly {
            out.add(input.clone(), w.clone(), f(k));
        }
    }
    out
}

/// Morphism `V -> V'` given by even components `phi^{k,l}`.
#[derive(Clone, Debug)]
pub struct BLMorphism<C> {
    pub source: Space,
    pub target: Space,
    pub components: Vec<ComponentMap<C>>,
    op: Operator<C>,
}

impl<C: Scalar> BLMorphism<C> {
    pub fn new(source: Space, target: Space, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(
            &components,
            &[ComponentKind::Morphism, ComponentKind::Augmentation],
            &source,
            &target,
        )?;
        let op = Operator::from_components(Parity::Even, &components)?;
        Ok(BLMorphism {
            source,
            target,
            components,
            op,
        })
    }

    pub fn from_operator(source: Space, target: Space, op: Operator<C>) -> Result<Self> {
        let components = op.to_components(ComponentKind::Morphism);
        validate_all(&components, &[ComponentKind::Morphism], &source, &target)?;
        Ok(BLMorphism {
            source,
            target,
            components,
            op,
        })
    }

    pub fn identity(space: &Space) -> Self {
        let mut op = Operator::new(Parity::Even);
        for l in space.letters() {
            op.add(&Word::single(l), Word::single(l), C::one());
        }
        Self::from_operator(space.clone(), space.clone(), op).expect("identity is valid")
    }

    pub fn operator(&self) -> &Operator<C> {
        &self.op
    }

    pub fn hat(&self) -> HatPhi<'_, C> {
        HatPhi::new(&self.op)
    }
}

/// Augmentation `epsilon: V -> 0`, components `epsilon^k: S^k V -> k`.
#[derive(Clone, Debug)]
pub struct Augmentation<C> {
    pub space: Space,
    pub components: Vec<ComponentMap<C>>,
    op: Operator<C>,
}

impl<C: Scalar> Augmentation<C> {
    pub fn new(space: Space, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(&components, &[ComponentKind::Augmentation], &space, &Space::zero())?;
        let op = Operator::from_components(Parity::Even, &components)?;
        Ok(Augmentation {
            space,
            components,
            op,
        })
    }

    pub fn zero(space: &Space) -> Self {
        Augmentation {
            space: space.clone(),
            components: Vec::new(),
            op: Operator::new(Parity::Even),
        }
    }

    pub fn operator(&self) -> &Operator<C> {
        &self.op
    }

    /// Value on a canonical word.
    pub fn value(&self, w: &Word) -> C {
        self.op
            .get(w)
            .and_then(|p| p.get(&Word::empty()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// `epsilon-hat: EV -> E0`.
    pub fn hat(&self) -> HatPhi<'_, C> {
        HatPhi::new(&self.op)
    }

    /// Components of `F_{s epsilon}`: identity in arity one plus `s epsilon`.
    pub fn f_operator(&self, s: &C) -> Operator<C> {
        let mut op = Operator::new(Parity::Even);
        for l in self.space.letters() {
            op.add(&Word::single(l), Word::single(l), C::one());
        }
        for (input, poly) in self.op.entries() {
            for (w, c) in poly {
                op.add(input, w.clone(), c.times(s));
            }
        }
        match self.op.known_arity() {
            Some(k) => op.with_known_arity(k),
            None => op,
        }
    }

    /// `epsilon` as a morphism to the zero algebra.
    pub fn to_morphism(&self) -> BLMorphism<C> {
        BLMorphism {
            source: self.space.clone(),
            target: Space::zero(),
            components: self.op.to_components(ComponentKind::Morphism),
            op: self.op.clone(),
        }
    }

    /// Reads a morphism into the zero algebra as an augmentation.
    pub fn from_morphism(f: &BLMorphism<C>) -> Result<Self> {
        if !f.target.is_empty() {
            return Err(Error::Config("augmentations map to the zero algebra".into()));
        }
        let components = f.operator().to_components(ComponentKind::Augmentation);
        validate_all(&components, &[ComponentKind::Augmentation], &f.source, &Space::zero())?;
        Ok(Augmentation {
            space: f.source.clone(),
            components,
            op: f.operator().clone(),
        })
    }

    /// The morphism `F_epsilon: (V, p) -> (V, p_epsilon)`.
    pub fn f_morphism(&self) -> BLMorphism<C> {
        BLMorphism::from_operator(self.space.clone(), self.space.clone(), self.f_operator(&C::one()))
            .expect("F_epsilon is valid")
    }
}

/// Pointed map `p_bullet` of arbitrary parity, assembled like `p-hat`.
#[derive(Clone, Debug)]
pub struct PointedMap<C> {
    pub space: Space,
    pub parity: Parity,
    pub components: Vec<ComponentMap<C>>,
    op: Operator<C>,
}

impl<C: Scalar> PointedMap<C> {
    pub fn new(space: Space, parity: Parity, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(
            &components,
            &[ComponentKind::Pointed, ComponentKind::ScalarShift],
            &space,
            &space,
        )?;
        let op = Operator::from_components(parity, &components)?;
        Ok(PointedMap {
            space,
            parity,
            components,
            op,
        })
    }

    pub fn from_operator(space: Space, op: Operator<C>) -> Result<Self> {
        let parity = op.parity();
        let components = op.to_components(ComponentKind::Pointed);
        validate_all(&components, &[ComponentKind::Pointed], &space, &space)?;
        Ok(PointedMap {
            space,
            parity,
            components,
            op,
        })
    }

    pub fn operator(&self) -> &Operator<C> {
        &self.op
    }

    pub fn hat(&self) -> HatP<C> {
        HatP::new(&self.op)
    }
}

/// Family of pointed components carrying constraint tags.
#[derive(Clone, Debug)]
pub struct MultiPointedMap<C> {
    pub space: Space,
    pub components: Vec<ComponentMap<C>>,
    groups: Vec<(Vec<u32>, Operator<C>)>,
}

impl<C: Scalar> MultiPointedMap<C> {
    pub fn new(space: Space, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(&components, &[ComponentKind::Pointed], &space, &space)?;
        let mut groups: Vec<(Vec<u32>, Operator<C>)> = Vec::new();
        for c in &components {
            if c.tags.is_empty() {
                return Err(Error::Parse("multi-pointed component without tags".into()));
            }
            let op = Operator::from_components(c.shift, std::slice::from_ref(c))?;
            match groups.iter_mut().find(|(t, _)| t == &c.tags) {
                Some((_, existing)) => {
                    if existing.parity() != c.shift {
                        return Err(Error::Config("mixed parities within one tag set".into()));
                    }
                    *existing = existing.plus(&op);
                }
                None => groups.push((c.tags.clone(), op)),
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(MultiPointedMap {
            space,
            components,
            groups,
        })
    }

    pub fn from_groups(space: Space, groups: Vec<(Vec<u32>, Operator<C>)>) -> Result<Self> {
        let mut components = Vec::new();
        for (tags, op) in &groups {
            for c in op.to_components(ComponentKind::Pointed) {
                components.push(c.with_tags(tags.clone()));
            }
        }
        Self::new(space, components)
    }

    /// Every tag in use.
    pub fn tags(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.groups.iter().flat_map(|(t, _)| t.clone()).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn groups(&self) -> &[(Vec<u32>, Operator<C>)] {
        &self.groups
    }

    pub fn hat(&self) -> HatMulti<C> {
        HatMulti::new(self.groups.clone(), self.tags())
    }
}

/// Pointed morphism `phi_bullet` of arbitrary parity.
#[derive(Clone, Debug)]
pub struct PointedMorphism<C> {
    pub source: Space,
    pub target: Space,
    pub parity: Parity,
    pub components: Vec<ComponentMap<C>>,
    op: Operator<C>,
}

impl<C: Scalar> PointedMorphism<C> {
    pub fn new(source: Space, target: Space, parity: Parity, components: Vec<ComponentMap<C>>) -> Result<Self> {
        validate_all(&components, &[ComponentKind::Pointed], &source, &target)?;
        let op = Operator::from_components(parity, &components)?;
        Ok(PointedMorphism {
            source,
            target,
            parity,
            components,
            op,
        })
    }

    pub fn zero(source: &Space, target: &Space, parity: Parity) -> Self {
        PointedMorphism {
            source: source.clone(),
            target: target.clone(),
            parity,
            components: Vec::new(),
            op: Operator::new(parity),
        }
    }

    pub fn from_operator(source: Space, target: Space, op: Operator<C>) -> Result<Self> {
        let parity = op.parity();
        let components = op.to_components(ComponentKind::Pointed);
        Self::new(source, target, parity, components).map(|mut m| {
            m.op = op;
            m
        })
    }

    pub fn operator(&self) -> &Operator<C> {
        &self.op
    }

    /// `phi_bullet-hat` with `phi` supplying the other applications.
    pub fn hat<'a>(&'a self, f: &'a BLMorphism<C>) -> HatPhi<'a, C> {
        HatPhi::pointed(f.operator(), &self.op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of checking an identity on every basis sentence.
#[derive(Clone)]
pub struct Report<C: Scalar> {
    pub status: Status,
    pub checked: usize,
    /// Smallest failing basis sentence.
    pub witness: Option<Sentence>,
    pub residue: Option<Expression<C>>,
    pub note: Option<String>,
}

impl<C: Scalar> std::fmt::Debug for Report<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Report")
            .field("status", &self.status)
            .field("checked", &self.checked)
            .field("witness", &self.witness)
            .field("residue", &self.residue)
            .field("note", &self.note)
            .finish()
    }
}

impl<C: Scalar> Report<C> {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Report {
            status: Status::Inconclusive,
            checked: 0,
            witness: None,
            residue: None,
            note: Some(reason.into()),
        }
    }
}

/// Evaluates `residue` on every basis sentence in parallel. The first
/// nonzero residue in basis order is the witness.
pub fn check_on_basis<C, F>(basis: &[Sentence], residue: F) -> Report<C>
where
    C: Scalar,
    F: Fn(&Sentence) -> (Expression<C>, bool) + Sync,
{
    let results: Vec<(Expression<C>, bool)> = basis.par_iter().map(&residue).collect();
    let mut escaped = 0;
    for (s, (r, esc)) in basis.iter().zip(&results) {
        if *esc {
            escaped += 1;
            continue;
        }
        if !r.is_zero() {
            return Report {
                status: Status::Fail,
                checked: basis.len(),
                witness: Some(s.clone()),
                residue: Some(r.clone()),
                note: None,
            };
        }
    }
    if escaped > 0 {
        return Report {
            status: Status::Inconclusive,
            checked: basis.len(),
            witness: None,
            residue: None,
            note: Some(format!("{escaped} basis sentences need components beyond the extracted arity")),
        };
    }
    Report {
        status: Status::Pass,
        checked: basis.len(),
        witness: None,
        residue: None,
        note: None,
    }
}

/// `a(s) - sign * b(s)` for two composites given as hat-maps.
pub fn difference<C: Scalar>(
    a: &dyn HatMap<C>,
    b: &dyn HatMap<C>,
    sign_b: Parity,
    s: &Sentence,
) -> (Expression<C>, bool) {
    let mut out = Expression::zero();
    let e1 = a.apply_sentence_into(s, &C::one(), &mut out);
    let k = if sign_b.is_odd() { C::one() } else { C::one().negated() };
    let e2 = b.apply_sentence_into(s, &k, &mut out);
    (out, e1 || e2)
}

/// `p-hat ∘ p-hat = 0` on sentences of nonempty words within `(L, K, W)`.
pub fn verify_bl<C: Scalar>(a: &BLAlgebra<C>, t: &Truncation) -> Report<C> {
    verify_square_zero(&a.hat(), &a.space, t)
}

pub fn verify_square_zero<C: Scalar>(hat: &dyn HatMap<C>, space: &Space, t: &Truncation) -> Report<C> {
    let basis = basis::sentences(space, &BasisSpec::nonempty(t));
    let sq = Then {
        first: hat,
        second: hat,
    };
    check_on_basis(&basis, |s| sq.apply_checked(&Expression::term(s.clone(), C::one())))
}

/// `phi-hat ∘ p-hat = q-hat ∘ phi-hat`.
pub fn verify_morphism<C: Scalar>(
    f: &BLMorphism<C>,
    source: &BLAlgebra<C>,
    target: &BLAlgebra<C>,
    t: &Truncation,
) -> Result<Report<C>> {
    check_spaces(&f.source, &source.space, "morphism source")?;
    check_spaces(&f.target, &target.space, "morphism target")?;
    Ok(verify_chain_map(&f.hat(), &source.hat(), &target.hat(), &source.space, t))
}

/// `f ∘ p = q ∘ f` for hat-maps `f` (even), `p`, `q`.
pub fn verify_chain_map<C: Scalar>(
    f: &dyn HatMap<C>,
    p: &dyn HatMap<C>,
    q: &dyn HatMap<C>,
    space: &Space,
    t: &Truncation,
) -> Report<C> {
    let basis = basis::sentences(space, &BasisSpec::nonempty(t));
    let lhs = Then { first: p, second: f };
    let rhs = Then { first: f, second: q };
    check_on_basis(&basis, |s| difference(&lhs, &rhs, Parity::Even, s))
}

pub(crate) fn check_spaces(a: &Space, b: &Space, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Config(format!("{what}: generator tables differ")));
    }
    Ok(())
}

/// `epsilon-hat ∘ p-hat = 0`.
pub fn verify_augmentation<C: Scalar>(
    eps: &Augmentation<C>,
    a: &BLAlgebra<C>,
    t: &Truncation,
) -> Result<Report<C>> {
    check_spaces(&eps.space, &a.space, "augmentation")?;
    let basis = basis::sentences(&a.space, &BasisSpec::nonempty(t));
    let hat_p = a.hat();
    let hat_e = eps.hat();
    let comp = Then {
        first: &hat_p,
        second: &hat_e,
    };
    Ok(check_on_basis(&basis, |s| comp.apply_checked(&Expression::term(s.clone(), C::one()))))
}

/// `p_bullet-hat ∘ p-hat = (-1)^{|p_bullet|} p-hat ∘ p_bullet-hat`.
pub fn verify_pointed<C: Scalar>(pt: &PointedMap<C>, a: &BLAlgebra<C>, t: &Truncation) -> Result<Report<C>> {
    check_spaces(&pt.space, &a.space, "pointed map")?;
    Ok(verify_pointed_hat(&pt.hat(), &a.hat(), &a.space, t))
}

pub fn verify_pointed_hat<C: Scalar>(
    dot: &dyn HatMap<C>,
    p: &dyn HatMap<C>,
    space: &Space,
    t: &Truncation,
) -> Report<C> {
    let basis = basis::sentences(space, &BasisSpec::nonempty(t));
    let lhs = Then { first: p, second: dot };
    let rhs = Then { first: dot, second: p };
    check_on_basis(&basis, |s| difference(&lhs, &rhs, dot.parity(), s))
}

/// Compatibility of `(phi, phi_bullet)` with pointed maps `p_bullet`, `q_bullet`:
/// `q• φ - (-1)^{|q•|} φ p• = q φ• - (-1)^{|φ•|} φ• p`.
#[allow(clippy::too_many_arguments)]
pub fn verify_compat<C: Scalar>(
    f: &BLMorphism<C>,
    fdot: &PointedMorphism<C>,
    source: &BLAlgebra<C>,
    target: &BLAlgebra<C>,
    pdot: &PointedMap<C>,
    qdot: &PointedMap<C>,
    t: &Truncation,
) -> Result<Report<C>> {
    check_spaces(&f.source, &source.space, "morphism source")?;
    check_spaces(&f.target, &target.space, "morphism target")?;
    check_spaces(&fdot.source, &source.space, "pointed morphism source")?;
    check_spaces(&fdot.target, &target.space, "pointed morphism target")?;
    check_spaces(&pdot.space, &source.space, "source pointed map")?;
    check_spaces(&qdot.space, &target.space, "target pointed map")?;
    if pdot.parity != qdot.parity || fdot.parity != pdot.parity + Parity::Odd {
        return Err(Error::Config(
            "pointed parities must satisfy |q•| = |p•| and |φ•| = |p•| + 1".into(),
        ));
    }
    Ok(verify_compat_hat(
        &f.hat(),
        &fdot.hat(f),
        &source.hat(),
        &target.hat(),
        &pdot.hat(),
        &qdot.hat(),
        &source.space,
        t,
    ))
}

#[allow(clippy::too_many_arguments)]
pub fn verify_compat_hat<C: Scalar>(
    f: &dyn HatMap<C>,
    fdot: &dyn HatMap<C>,
    p: &dyn HatMap<C>,
    q: &dyn HatMap<C>,
    pdot: &dyn HatMap<C>,
    qdot: &dyn HatMap<C>,
    space: &Space,
    t: &Truncation,
) -> Report<C> {
    let basis = basis::sentences(space, &BasisSpec::nonempty(t));
    let a = Then { first: f, second: qdot };
    let b = Then { first: pdot, second: f };
    let c = Then { first: fdot, second: q };
    let d = Then { first: p, second: fdot };
    check_on_basis(&basis, |s| {
        let one = C::one();
        let neg = one.negated();
        let sgn = |par: Parity, k: &C| if par.is_odd() { k.clone() } else { k.negated() };
        let mut out = Expression::zero();
        let mut esc = a.apply_sentence_into(s, &one, &mut out);
        esc |= b.apply_sentence_into(s, &sgn(qdot.parity(), &one), &mut out);
        esc |= c.apply_sentence_into(s, &neg, &mut out);
        esc |= d.apply_sentence_into(s, &sgn(fdot.parity(), &neg), &mut out);
        (out, esc)
    })
}

/// Components of a hat-map: `pi_{1}` of its value on `v_1 ⊙ ... ⊙ v_k` for
/// every canonical word `v_1 ... v_k` with `1 <= k <= max_arity`.
pub fn extract<C: Scalar>(map: &dyn HatMap<C>, source: &Space, max_arity: usize) -> Operator<C> {
    let words = basis::words(source, 1, max_arity, None);
    let rows: Vec<(Word, Expression<C>)> = words
        .par_iter()
        .filter_map(|w| {
            let s = basis::spread(w)?;
            Some((w.clone(), map.apply_sentence(&s).project_length(1)))
        })
        .collect();
    let mut op = Operator::new(map.parity());
    for (w, e) in rows {
        for (s, c) in e.iter() {
            op.add(&w, s.words()[0].clone(), c.clone());
        }
    }
    op.with_known_arity(max_arity)
}

/// `F-hat_epsilon ∘ inner ∘ F-hat_{-epsilon}`.
pub struct Conjugate<'a, C> {
    forward: Operator<C>,
    backward: Operator<C>,
    inner: &'a dyn HatMap<C>,
}

impl<'a, C: Scalar> Conjugate<'a, C> {
    pub fn new(eps: &Augmentation<C>, inner: &'a dyn HatMap<C>) -> Self {
        Conjugate {
            forward: eps.f_operator(&C::one()),
            backward: eps.f_operator(&C::one().negated()),
            inner,
        }
    }
}

impl<C: Scalar> HatMap<C> for Conjugate<'_, C> {
    fn parity(&self) -> Parity {
        self.inner.parity()
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        let back = HatPhi::new(&self.backward);
        let fwd = HatPhi::new(&self.forward);
        let mut a = Expression::zero();
        let mut esc = back.apply_sentence_into(s, coeff, &mut a);
        let (b, e) = self.inner.apply_checked(&a);
        esc |= e;
        for (t, c) in b.iter() {
            esc |= fwd.apply_sentence_into(t, c, out);
        }
        esc
    }
}

/// Result of linearizing along an augmentation.
#[derive(Clone, Debug)]
pub struct Linearization<C: Scalar> {
    /// `p_epsilon`, extracted up to the truncation arity.
    pub algebra: BLAlgebra<C>,
    /// Arity-`k` inputs with a nonzero `p_epsilon^{k,0}`; empty for a true
    /// augmentation.
    pub constant_terms: Vec<Word>,
    pub report: Report<C>,
}

/// `p_epsilon = F_epsilon ∘ p ∘ F_{-epsilon}` by extraction.
pub fn linearize<C: Scalar>(a: &BLAlgebra<C>, eps: &Augmentation<C>, t: &Truncation) -> Result<Linearization<C>> {
    let check = verify_augmentation(eps, a, t)?;
    if !check.passed() {
        return Err(Error::Precondition(format!(
            "not an augmentation: epsilon-hat ∘ p-hat fails at {}",
            check
                .witness
                .as_ref()
                .map(|s| a.space.format_sentence(s))
                .unwrap_or_else(|| "an unchecked sentence".into())
        )));
    }
    let hat = a.hat();
    let conj = Conjugate::new(eps, &hat);
    let op = extract(&conj, &a.space, t.extraction_arity());
    let constant_terms = op
        .entries()
        .filter(|(_, poly)| poly.contains_key(&Word::empty()))
        .map(|(w, _)| w.clone())
        .collect();
    let algebra = BLAlgebra::from_operator(a.space.clone(), op)?;
    let report = verify_bl(&algebra, t);
    Ok(Linearization {
        algebra,
        constant_terms,
        report,
    })
}

/// `g ∘ f` by extraction of `pi_1 g-hat f-hat` on single-letter sentences.
pub fn compose<C: Scalar>(f: &BLMorphism<C>, g: &BLMorphism<C>, t: &Truncation) -> Result<BLMorphism<C>> {
    check_spaces(&f.target, &g.source, "composition")?;
    let fh = f.hat();
    let gh = g.hat();
    let both = Then {
        first: &fh,
        second: &gh,
    };
    let op = extract(&both, &f.source, t.extraction_arity());
    BLMorphism::from_operator(f.source.clone(), g.target.clone(), op)
}
