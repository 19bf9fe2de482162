//! JSON documents for algebras, maps, MC elements, witnesses and reports.
//!
//! Saving is canonical: generators sorted by id, words and sentences in
//! canonical order, rationals as reduced `"p/q"` strings. A file written by
//! this module reloads and re-saves byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembler::{ComponentKind, ComponentMap};
use crate::basis::Truncation;
use crate::error::{Error, Result};
use crate::ibl::{GridTorsion, IBLAlgebra, H};
use crate::invariants::{Search, Spectral};
use crate::mc::MCElement;
use crate::scalar::{HbarSeries, NovikovElem, NovikovMode, Rational, Scalar};
use crate::space::{Expression, Generator, Parity, Sentence, Space, Word};
use crate::structures::{
    Augmentation, BLAlgebra, BLMorphism, MultiPointedMap, PointedMap, PointedMorphism, Report,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    Algebra,
    IblAlgebra,
    Morphism,
    Augmentation,
    Pointed,
    MultiPointed,
    PointedMorphism,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    Rational,
    Novikov,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NovikovTerm {
    pub c: Rational,
    pub t: Rational,
}

/// A coefficient: a rational, a Novikov element, or an `hbar`-series keyed
/// by genus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffDoc {
    Rational(Rational),
    Novikov(Vec<NovikovTerm>),
    /// Keys are genera written as decimal strings.
    Hbar(BTreeMap<String, Rational>),
}

/// Coefficient rings that have a document form.
pub trait DocScalar: Scalar {
    const RING: Ring;
    fn to_doc(&self) -> CoeffDoc;
    fn from_doc(d: &CoeffDoc) -> Result<Self>;
}

impl DocScalar for Rational {
    const RING: Ring = Ring::Rational;

    fn to_doc(&self) -> CoeffDoc {
        CoeffDoc::Rational(self.clone())
    }

    fn from_doc(d: &CoeffDoc) -> Result<Self> {
        match d {
            CoeffDoc::Rational(r) => Ok(r.clone()),
            _ => Err(Error::Parse("expected a rational coefficient".into())),
        }
    }
}

impl DocScalar for NovikovElem {
    const RING: Ring = Ring::Novikov;

    fn to_doc(&self) -> CoeffDoc {
        CoeffDoc::Novikov(
            self.terms()
                .iter()
                .map(|(c, t)| NovikovTerm {
                    c: c.clone(),
                    t: t.clone(),
                })
                .collect(),
        )
    }

    fn from_doc(d: &CoeffDoc) -> Result<Self> {
        match d {
            CoeffDoc::Rational(r) => Ok(NovikovElem::scalar(r.clone())),
            CoeffDoc::Novikov(terms) => {
                let mode = if terms.iter().any(|x| x.t.is_negative()) {
                    NovikovMode::Field
                } else {
                    NovikovMode::Ring
                };
                NovikovElem::new(terms.iter().map(|x| (x.c.clone(), x.t.clone())), None, mode)
            }
            CoeffDoc::Hbar(_) => Err(Error::Parse("expected a Novikov coefficient".into())),
        }
    }
}

impl DocScalar for H {
    const RING: Ring = Ring::Rational;

    fn to_doc(&self) -> CoeffDoc {
        CoeffDoc::Hbar(self.coeffs().iter().map(|(g, c)| (g.to_string(), c.clone())).collect())
    }

    fn from_doc(d: &CoeffDoc) -> Result<Self> {
        match d {
            CoeffDoc::Rational(r) => Ok(HbarSeries::monomial(r.clone(), 0)),
            CoeffDoc::Hbar(m) => {
                let mut terms = Vec::with_capacity(m.len());
                for (g, c) in m {
                    let g: u32 = g.parse().map_err(|_| Error::Parse(format!("bad hbar exponent {g:?}")))?;
                    terms.push((g, c.clone()));
                }
                Ok(HbarSeries::from_coeffs(terms, None))
            }
            CoeffDoc::Novikov(_) => Err(Error::Parse("expected an hbar-series coefficient".into())),
        }
    }
}

pub type WordDoc = Vec<String>;
pub type SentenceDoc = Vec<WordDoc>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub sentence: SentenceDoc,
    pub coefficient: CoeffDoc,
}

pub type ExpressionDoc = Vec<TermDoc>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportDoc {
    #[serde(rename = "in")]
    pub input: WordDoc,
    pub out: ExpressionDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub kind: String,
    pub arity: usize,
    pub genus: u32,
    pub shift: Parity,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    pub support: Vec<SupportDoc>,
}

/// One algebraic object per file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDoc {
    pub object: ObjectKind,
    pub coefficients: Ring,
    pub generators: Vec<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_generators: Option<Vec<Generator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
    pub components: Vec<ComponentDoc>,
}

pub fn word_doc(space: &Space, w: &Word) -> WordDoc {
    w.letters().iter().map(|l| space.id(*l).to_string()).collect()
}

pub fn sentence_doc(space: &Space, s: &Sentence) -> SentenceDoc {
    s.words().iter().map(|w| word_doc(space, w)).collect()
}

pub fn expression_doc<C: DocScalar>(space: &Space, e: &Expression<C>) -> ExpressionDoc {
    e.iter()
        .map(|(s, c)| TermDoc {
            sentence: sentence_doc(space, s),
            coefficient: c.to_doc(),
        })
        .collect()
}

fn parse_word(space: &Space, ids: &WordDoc) -> Result<Option<(crate::space::Sign, Word)>> {
    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    space.word(&refs)
}

/// Parses a sentence, canonicalizing with sign. `None` if it vanishes.
pub fn parse_sentence(space: &Space, doc: &SentenceDoc) -> Result<Option<(crate::space::Sign, Sentence)>> {
    let mut words = Vec::with_capacity(doc.len());
    let mut sign = crate::space::Sign::Plus;
    for w in doc {
        match parse_word(space, w)? {
            Some((s, w)) => {
                sign = sign * s;
                words.push(w);
            }
            None => return Ok(None),
        }
    }
    Ok(Sentence::from_words(words).map(|(s, x)| (sign * s, x)))
}

pub fn parse_expression<C: DocScalar>(space: &Space, doc: &ExpressionDoc) -> Result<Expression<C>> {
    let mut e = Expression::zero();
    for t in doc {
        if let Some((sign, s)) = parse_sentence(space, &t.sentence)? {
            e.add_signed(s, sign, C::from_doc(&t.coefficient)?);
        }
    }
    Ok(e)
}

fn components_doc<C: DocScalar>(source: &Space, target: &Space, comps: &[ComponentMap<C>]) -> Vec<ComponentDoc> {
    comps
        .iter()
        .map(|c| ComponentDoc {
            kind: c.kind.as_str().to_string(),
            arity: c.arity,
            genus: c.genus,
            shift: c.shift,
            tags: c.tags.clone(),
            support: c
                .support
                .iter()
                .map(|(input, poly)| SupportDoc {
                    input: word_doc(source, input),
                    out: poly
                        .iter()
                        .map(|(w, k)| TermDoc {
                            sentence: vec![word_doc(target, w)],
                            coefficient: k.to_doc(),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect()
}

fn parse_components<C: DocScalar>(source: &Space, target: &Space, docs: &[ComponentDoc]) -> Result<Vec<ComponentMap<C>>> {
    let mut out = Vec::with_capacity(docs.len());
    for d in docs {
        let kind = ComponentKind::parse(&d.kind)?;
        let mut c = ComponentMap::new(kind, d.arity, d.genus, d.shift).with_tags(d.tags.clone());
        for s in &d.support {
            let (sign, input) = parse_word(source, &s.input)?
                .ok_or_else(|| Error::Parse(format!("input word {:?} vanishes", s.input)))?;
            for t in &s.out {
                if t.sentence.len() != 1 {
                    return Err(Error::Parse("component outputs are single words".into()));
                }
                let Some((osign, out)) = parse_word(target, &t.sentence[0])? else {
                    continue;
                };
                c.add(input.clone(), out, (sign * osign).apply(C::from_doc(&t.coefficient)?));
            }
        }
        out.push(c);
    }
    Ok(out)
}

fn gens(space: &Space) -> Vec<Generator> {
    space.generators().to_vec()
}

impl ObjectDoc {
    fn expect(&self, kind: ObjectKind) -> Result<()> {
        if self.object != kind {
            return Err(Error::Parse(format!(
                "expected a {} document, found {}",
                kind_name(kind),
                kind_name(self.object)
            )));
        }
        Ok(())
    }

    fn check_ring<C: DocScalar>(&self) -> Result<()> {
        if self.coefficients == Ring::Novikov && C::RING == Ring::Rational {
            return Err(Error::Config("Novikov coefficients where rationals are required".into()));
        }
        Ok(())
    }

    fn space(&self) -> Result<Space> {
        Space::new(self.generators.clone())
    }

    fn target_space(&self) -> Result<Space> {
        match &self.target_generators {
            Some(g) => Space::new(g.clone()),
            None => Err(Error::Parse("missing target_generators".into())),
        }
    }

    fn simple<C: DocScalar>(object: ObjectKind, space: &Space, comps: &[ComponentMap<C>]) -> Self {
        ObjectDoc {
            object,
            coefficients: C::RING,
            generators: gens(space),
            target_generators: None,
            parity: None,
            components: components_doc(space, space, comps),
        }
    }

    pub fn algebra<C: DocScalar>(&self) -> Result<BLAlgebra<C>> {
        self.expect(ObjectKind::Algebra)?;
        self.check_ring::<C>()?;
        let space = self.space()?;
        let comps = parse_components(&space, &space, &self.components)?;
        BLAlgebra::new(space, comps)
    }

    pub fn from_algebra<C: DocScalar>(a: &BLAlgebra<C>) -> Self {
        Self::simple(ObjectKind::Algebra, &a.space, &a.components)
    }

    pub fn ibl(&self) -> Result<IBLAlgebra> {
        self.expect(ObjectKind::IblAlgebra)?;
        self.check_ring::<Rational>()?;
        let space = self.space()?;
        let comps = parse_components(&space, &space, &self.components)?;
        IBLAlgebra::new(space, comps)
    }

    pub fn from_ibl(a: &IBLAlgebra) -> Self {
        Self::simple(ObjectKind::IblAlgebra, &a.space, &a.components)
    }

    pub fn morphism<C: DocScalar>(&self) -> Result<BLMorphism<C>> {
        self.expect(ObjectKind::Morphism)?;
        self.check_ring::<C>()?;
        let (s, t) = (self.space()?, self.target_space()?);
        let comps = parse_components(&s, &t, &self.components)?;
        BLMorphism::new(s, t, comps)
    }

    pub fn from_morphism<C: DocScalar>(f: &BLMorphism<C>) -> Self {
        ObjectDoc {
            object: ObjectKind::Morphism,
            coefficients: C::RING,
            generators: gens(&f.source),
            target_generators: Some(gens(&f.target)),
            parity: None,
            components: components_doc(&f.source, &f.target, &f.components),
        }
    }

    pub fn augmentation<C: DocScalar>(&self) -> Result<Augmentation<C>> {
        self.expect(ObjectKind::Augmentation)?;
        self.check_ring::<C>()?;
        let space = self.space()?;
        let comps = parse_components(&space, &Space::zero(), &self.components)?;
        Augmentation::new(space, comps)
    }

    pub fn from_augmentation<C: DocScalar>(e: &Augmentation<C>) -> Self {
        ObjectDoc {
            components: components_doc(&e.space, &Space::zero(), &e.components),
            ..Self::simple::<C>(ObjectKind::Augmentation, &e.space, &[])
        }
    }

    pub fn pointed<C: DocScalar>(&self) -> Result<PointedMap<C>> {
        self.expect(ObjectKind::Pointed)?;
        self.check_ring::<C>()?;
        let space = self.space()?;
        let parity = self.parity.ok_or_else(|| Error::Parse("pointed map needs a parity".into()))?;
        let comps = parse_components(&space, &space, &self.components)?;
        PointedMap::new(space, parity, comps)
    }

    pub fn from_pointed<C: DocScalar>(p: &PointedMap<C>) -> Self {
        ObjectDoc {
            parity: Some(p.parity),
            ..Self::simple(ObjectKind::Pointed, &p.space, &p.components)
        }
    }

    pub fn multi_pointed<C: DocScalar>(&self) -> Result<MultiPointedMap<C>> {
        self.expect(ObjectKind::MultiPointed)?;
        self.check_ring::<C>()?;
        let space = self.space()?;
        let comps = parse_components(&space, &space, &self.components)?;
        MultiPointedMap::new(space, comps)
    }

    pub fn from_multi_pointed<C: DocScalar>(space: &Space, comps: &[ComponentMap<C>]) -> Self {
        Self::simple(ObjectKind::MultiPointed, space, comps)
    }

    pub fn pointed_morphism<C: DocScalar>(&self) -> Result<PointedMorphism<C>> {
        self.expect(ObjectKind::PointedMorphism)?;
        self.check_ring::<C>()?;
        let (s, t) = (self.space()?, self.target_space()?);
        let parity = self.parity.ok_or_else(|| Error::Parse("pointed morphism needs a parity".into()))?;
        let comps = parse_components(&s, &t, &self.components)?;
        PointedMorphism::new(s, t, parity, comps)
    }

    pub fn from_pointed_morphism<C: DocScalar>(f: &PointedMorphism<C>) -> Self {
        ObjectDoc {
            object: ObjectKind::PointedMorphism,
            coefficients: C::RING,
            generators: gens(&f.source),
            target_generators: Some(gens(&f.target)),
            parity: Some(f.parity),
            components: components_doc(&f.source, &f.target, &f.components),
        }
    }
}

fn kind_name(k: ObjectKind) -> String {
    serde_json::to_value(k)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// An MC element, optionally with a pointed MC element `mc•`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McDoc {
    pub object: String,
    pub generators: Vec<Generator>,
    pub min_exponent: Option<Rational>,
    pub element: ExpressionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointed: Option<ExpressionDoc>,
}

impl McDoc {
    pub fn new(space: &Space, mc: &MCElement, pointed: Option<&Expression<NovikovElem>>) -> Self {
        McDoc {
            object: "mc".into(),
            generators: gens(space),
            min_exponent: mc.min_exponent(),
            element: expression_doc(space, &mc.whole()),
            pointed: pointed.map(|p| expression_doc(space, p)),
        }
    }

    pub fn space(&self) -> Result<Space> {
        Space::new(self.generators.clone())
    }

    /// Parses the element and checks the declared minimal exponent.
    pub fn element(&self, t: &Truncation) -> Result<MCElement> {
        if self.object != "mc" {
            return Err(Error::Parse(format!("expected an mc document, found {:?}", self.object)));
        }
        let space = self.space()?;
        let mc = MCElement::new(&parse_expression(&space, &self.element)?, t)?;
        if mc.min_exponent() != self.min_exponent {
            return Err(Error::Parse(format!(
                "declared min_exponent {:?} differs from the element's {:?}",
                self.min_exponent,
                mc.min_exponent()
            )));
        }
        Ok(mc)
    }

    pub fn pointed_element(&self) -> Result<Option<Expression<NovikovElem>>> {
        let space = self.space()?;
        self.pointed.as_ref().map(|p| parse_expression(&space, p)).transpose()
    }
}

/// A verification outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub check: String,
    pub status: String,
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SentenceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<ExpressionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportDoc {
    pub fn new<C: DocScalar>(check: &str, space: &Space, r: &Report<C>) -> Self {
        ReportDoc {
            check: check.into(),
            status: r.status.as_str().into(),
            checked: r.checked,
            witness: r.witness.as_ref().map(|s| sentence_doc(space, s)),
            residue: r.residue.as_ref().map(|e| expression_doc(space, e)),
            note: r.note.clone(),
        }
    }
}

/// Output of a verification command: every report it ran, the overall
/// verdict, and the truncation used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecksDoc {
    pub command: String,
    pub status: String,
    pub bounds: Truncation,
    pub reports: Vec<ReportDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
}

impl ChecksDoc {
    /// The verdict is the first non-passing report status, else `"pass"`.
    pub fn new(command: &str, bounds: &Truncation, reports: Vec<ReportDoc>) -> Self {
        let status = reports
            .iter()
            .map(|r| r.status.as_str())
            .find(|s| *s != "pass")
            .unwrap_or("pass")
            .to_string();
        ChecksDoc {
            command: command.into(),
            status,
            bounds: bounds.clone(),
            reports,
            result: None,
        }
    }

    pub fn with_result<T: Serialize>(mut self, x: &T) -> Result<Self> {
        self.result = Some(serde_json::to_value(x)?);
        Ok(self)
    }
}

/// Result of an invariant search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchDoc {
    pub invariant: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ExpressionDoc>,
    pub bounds: Truncation,
}

impl SearchDoc {
    /// `value` is the invariant read off from the level `k`.
    pub fn new<C: DocScalar>(
        invariant: &str,
        space: &Space,
        r: &Search<C>,
        value: impl Fn(usize) -> i64,
        t: &Truncation,
    ) -> Self {
        match r {
            Search::Found { k, witness } => SearchDoc {
                invariant: invariant.into(),
                status: "exact_at".into(),
                k: Some(*k),
                value: Some(Rational::int(value(*k))),
                witness: Some(expression_doc(space, witness)),
                bounds: t.clone(),
            },
            Search::NotFound { .. } => SearchDoc {
                invariant: invariant.into(),
                status: "not_found".into(),
                k: None,
                value: None,
                witness: None,
                bounds: t.clone(),
            },
        }
    }

    pub fn spectral(space: &Space, r: &Spectral, t: &Truncation) -> Self {
        match r {
            Spectral::Found { value, witness } => SearchDoc {
                invariant: "spectral".into(),
                status: "exact_at".into(),
                k: None,
                value: Some(value.clone()),
                witness: Some(expression_doc(space, witness)),
                bounds: t.clone(),
            },
            Spectral::NotFound { .. } => SearchDoc {
                invariant: "spectral".into(),
                status: "not_found".into(),
                k: None,
                value: None,
                witness: None,
                bounds: t.clone(),
            },
        }
    }
}

/// Result of a grid torsion search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub status: String,
    pub n: u32,
    pub m: usize,
    pub k: u32,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ExpressionDoc>,
    pub bounds: Truncation,
}

impl GridDoc {
    pub fn new(space: &Space, n: u32, m: usize, k: u32, r: &GridTorsion, t: &Truncation) -> Self {
        match r {
            GridTorsion::Witness { x, degenerate, .. } => GridDoc {
                status: "exact_at".into(),
                n,
                m,
                k,
                degenerate: *degenerate,
                witness: Some(expression_doc(space, x)),
                bounds: t.clone(),
            },
            GridTorsion::NotFound { .. } => GridDoc {
                status: "not_found".into(),
                n,
                m,
                k,
                degenerate: false,
                witness: None,
                bounds: t.clone(),
            },
        }
    }
}

/// A sentence and an arity whose gluings are counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingDoc {
    pub object: String,
    pub generators: Vec<Generator>,
    pub sentence: SentenceDoc,
    pub arity: usize,
    pub multi_letter: bool,
}

impl GluingDoc {
    pub fn count(&self) -> Result<usize> {
        if self.object != "gluing-fixture" {
            return Err(Error::Parse(format!("expected a gluing-fixture document, found {:?}", self.object)));
        }
        let space = Space::new(self.generators.clone())?;
        let (_, s) = parse_sentence(&space, &self.sentence)?
            .ok_or_else(|| Error::Parse("fixture sentence vanishes".into()))?;
        Ok(crate::assembler::enumerate_gluings(&s, self.arity, self.multi_letter).len())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(x: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(x)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

pub fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path)?)
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
