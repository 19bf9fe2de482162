//! Bundled example objects and their expected outcomes.
//!
//! Every object is built here and shipped as JSON under `catalog/`; a test
//! keeps the shipped files equal to what this module generates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembler::{ComponentKind, ComponentMap};
use crate::error::Result;
use crate::ibl::IBLAlgebra;
use crate::io::{self, DocScalar, GluingDoc, McDoc, ObjectDoc, SentenceDoc};
use crate::mc::MCElement;
use crate::basis::Truncation;
use crate::scalar::{NovikovElem, Rational, Scalar};
use crate::space::{Expression, Generator, Parity, Sentence, Space, Word};
use crate::structures::{Augmentation, BLAlgebra, BLMorphism, PointedMap, PointedMorphism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotFound {
    #[serde(rename = "not_found")]
    NotFound,
}

/// An invariant value, or `"not_found"` within the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Value(usize),
    Missing(NotFound),
}

impl Level {
    pub fn of(k: Option<usize>) -> Self {
        k.map_or(Level::Missing(NotFound::NotFound), Level::Value)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// `"pass"` or `"fail"` for the object's defining equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SentenceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilde_order: Option<Level>,
    /// `O(V, epsilon∘phi, p_•)` for a compatible quadruple.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_order: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gluings: Option<usize>,
}

/// One bundled file. Related files are named by their file names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_pointed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pointed: Option<String>,
    /// Overrides the manifest truncation for this entry's checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    pub expect: Expect,
}

impl ManifestEntry {
    fn new(file: &str, object: &str, expect: Expect) -> Self {
        ManifestEntry {
            file: file.into(),
            object: object.into(),
            algebra: None,
            augmentation: None,
            source: None,
            target: None,
            morphism: None,
            source_pointed: None,
            target_pointed: None,
            truncation: None,
            expect,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub truncation: Truncation,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn entry(&self, file: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.file == file)
    }
}

pub const MANIFEST: &str = "manifest.json";

/// A generated file and its manifest entry.
pub struct Bundled {
    pub contents: String,
    pub entry: ManifestEntry,
}

fn q(n: i64) -> Rational {
    Rational::int(n)
}

fn space(gens: &[(&str, Parity)]) -> Space {
    Space::new(gens.iter().map(|(id, p)| Generator::new(*id, *p)).collect()).expect("catalog space")
}

/// Components from `(input ids, output ids, coefficient)` triples, one
/// component per input length.
fn comps<C: Scalar>(
    kind: ComponentKind,
    shift: Parity,
    genus: u32,
    source: &Space,
    target: &Space,
    entries: Vec<(&[&str], &[&str], C)>,
) -> Vec<ComponentMap<C>> {
    let mut out: Vec<ComponentMap<C>> = Vec::new();
    for (input, output, c) in entries {
        let (s1, w) = source.word_nonzero(input).expect("catalog input");
        let (s2, o) = if output.is_empty() {
            (crate::space::Sign::Plus, Word::empty())
        } else {
            target.word_nonzero(output).expect("catalog output")
        };
        let c = (s1 * s2).apply(c);
        match out.iter_mut().find(|m| m.arity == w.len()) {
            Some(m) => m.add(w, o, c),
            None => {
                let mut m = ComponentMap::new(kind, w.len(), genus, shift);
                m.add(w, o, c);
                out.push(m);
            }
        }
    }
    out
}

fn algebra<C: Scalar>(s: &Space, entries: Vec<(&[&str], &[&str], C)>) -> BLAlgebra<C> {
    BLAlgebra::new(s.clone(), comps(ComponentKind::Structure, Parity::Odd, 0, s, s, entries)).expect("catalog algebra")
}

pub fn zero() -> BLAlgebra<Rational> {
    algebra(&space(&[("x", Parity::Odd)]), vec![])
}

pub fn a0() -> BLAlgebra<Rational> {
    algebra(&space(&[("a", Parity::Odd)]), vec![(&["a"], &[], q(1))])
}

pub fn a1_space() -> Space {
    space(&[("x", Parity::Odd), ("y", Parity::Even)])
}

pub fn a1() -> BLAlgebra<Rational> {
    algebra(&a1_space(), vec![(&["x", "y"], &[], q(1))])
}

pub fn a1_renamed() -> BLAlgebra<Rational> {
    algebra(&space(&[("u", Parity::Odd), ("v", Parity::Even)]), vec![(&["u", "v"], &[], q(1))])
}

/// `p(a) = b`, `p(b) = a`: the square is the identity on single letters.
pub fn bad_d2() -> BLAlgebra<Rational> {
    algebra(
        &space(&[("a", Parity::Even), ("b", Parity::Odd)]),
        vec![(&["a"], &["b"], q(1)), (&["b"], &["a"], q(1))],
    )
}

pub fn dga() -> BLAlgebra<Rational> {
    algebra(
        &space(&[("a", Parity::Odd), ("b", Parity::Even), ("c", Parity::Even)]),
        vec![(&["b"], &["a"], q(1)), (&["b", "c"], &["a"], q(1))],
    )
}

pub fn dga_eps() -> Augmentation<Rational> {
    let s = dga().space;
    let z = Space::zero();
    Augmentation::new(s.clone(), comps(ComponentKind::Augmentation, Parity::Even, 0, &s, &z, vec![(&["b"], &[], q(1))]))
        .expect("catalog augmentation")
}

pub fn point() -> BLAlgebra<Rational> {
    algebra(&space(&[("c", Parity::Even)]), vec![])
}

pub fn point_eps() -> Augmentation<Rational> {
    Augmentation::zero(&point().space)
}

fn point_pointed_by(k: Rational) -> PointedMap<Rational> {
    let s = point().space;
    PointedMap::new(s.clone(), Parity::Even, comps(ComponentKind::Pointed, Parity::Even, 0, &s, &s, vec![(&["c"], &[], k)]))
        .expect("catalog pointed map")
}

pub fn point_pointed() -> PointedMap<Rational> {
    point_pointed_by(q(1))
}

pub fn point_half_pointed() -> PointedMap<Rational> {
    point_pointed_by(Rational::new(1, 2))
}

/// `c -> 2c`, compatible with the pointed maps `c -> 1` and `c -> 1/2`.
pub fn point_double() -> BLMorphism<Rational> {
    let s = point().space;
    BLMorphism::new(s.clone(), s.clone(), comps(ComponentKind::Morphism, Parity::Even, 0, &s, &s, vec![(&["c"], &["c"], q(2))]))
        .expect("catalog morphism")
}

pub fn point_fdot() -> PointedMorphism<Rational> {
    let s = point().space;
    PointedMorphism::zero(&s, &s, Parity::Odd)
}

pub fn a1_to_a0() -> BLMorphism<Rational> {
    let (s, t) = (a1().space, a0().space);
    BLMorphism::new(s.clone(), t.clone(), comps(ComponentKind::Morphism, Parity::Even, 0, &s, &t, vec![(&["x", "y"], &["a"], q(1))]))
        .expect("catalog morphism")
}

pub fn a1_rename() -> BLMorphism<Rational> {
    let (s, t) = (a1().space, a1_renamed().space);
    BLMorphism::new(
        s.clone(),
        t.clone(),
        comps(
            ComponentKind::Morphism,
            Parity::Even,
            0,
            &s,
            &t,
            vec![(&["x"], &["u"], q(1)), (&["y"], &["v"], q(1))],
        ),
    )
    .expect("catalog morphism")
}

fn n1() -> NovikovElem {
    NovikovElem::one()
}

pub fn toy() -> BLAlgebra<NovikovElem> {
    algebra(
        &space(&[("x", Parity::Odd), ("y", Parity::Even), ("z", Parity::Even)]),
        vec![(&["x", "y"], &["z"], n1())],
    )
}

/// `mc = T y`.
pub fn toy_mc() -> MCElement {
    let s = toy().space;
    let (_, y) = s.word_nonzero(&["y"]).expect("y");
    let x = Expression::term(Sentence::single(y), NovikovElem::monomial(q(1), q(1)));
    MCElement::new(&x, &Truncation::default()).expect("catalog mc")
}

/// The identity plus `y y -> z`.
pub fn toy_twist() -> BLMorphism<NovikovElem> {
    let s = toy().space;
    BLMorphism::new(
        s.clone(),
        s.clone(),
        comps(
            ComponentKind::Morphism,
            Parity::Even,
            0,
            &s,
            &s,
            vec![
                (&["x"], &["x"], n1()),
                (&["y"], &["y"], n1()),
                (&["z"], &["z"], n1()),
                (&["y", "y"], &["z"], n1()),
            ],
        ),
    )
    .expect("catalog morphism")
}

pub fn a1_ibl() -> IBLAlgebra {
    IBLAlgebra::from_bl(&a1()).expect("catalog ibl")
}

fn genus_one(input: &str, output: &str) -> ComponentMap<Rational> {
    let s = a1_space();
    comps(ComponentKind::Structure, Parity::Odd, 1, &s, &s, vec![(&[input], &[output], q(1))])
        .pop()
        .expect("one component")
}

/// `A1` plus `p^{1,1,1}(x) = y`.
pub fn a1_ibl_lift() -> IBLAlgebra {
    a1_ibl().with_component(genus_one("x", "y")).expect("catalog ibl")
}

/// `A1` plus `p^{1,1,1}(y) = x`, which breaks the square.
pub fn a1_ibl_bad() -> IBLAlgebra {
    a1_ibl().with_component(genus_one("y", "x")).expect("catalog ibl")
}

pub fn gluing_fixture() -> GluingDoc {
    let generators: Vec<Generator> = (1..=8).map(|i| Generator::new(format!("v{i}"), Parity::Odd)).collect();
    let ids = |r: std::ops::RangeInclusive<usize>| r.map(|i| format!("v{i}")).collect::<Vec<_>>();
    GluingDoc {
        object: "gluing-fixture".into(),
        generators,
        sentence: vec![ids(1..=3), ids(4..=6), ids(7..=8)],
        arity: 2,
        multi_letter: false,
    }
}

fn pass() -> Option<String> {
    Some("pass".into())
}

fn bundle_object(doc: &ObjectDoc, entry: ManifestEntry) -> Result<Bundled> {
    Ok(Bundled { contents: io::to_json(doc)?, entry })
}

fn alg_entry<C: DocScalar>(file: &str, a: &BLAlgebra<C>, expect: Expect) -> Result<Bundled> {
    bundle_object(&ObjectDoc::from_algebra(a), ManifestEntry::new(file, "algebra", expect))
}

/// Every bundled file in manifest order.
pub fn bundle() -> Result<Vec<Bundled>> {
    let mut out = Vec::new();

    out.push(alg_entry(
        "zero.json",
        &zero(),
        Expect { verify: pass(), torsion: Some(Level::Missing(NotFound::NotFound)), ..Default::default() },
    )?);
    out.push(alg_entry("A0.json", &a0(), Expect { verify: pass(), torsion: Some(Level::Value(0)), ..Default::default() })?);
    out.push(alg_entry("A1.json", &a1(), Expect { verify: pass(), torsion: Some(Level::Value(1)), ..Default::default() })?);
    out.push(alg_entry(
        "A1-renamed.json",
        &a1_renamed(),
        Expect { verify: pass(), torsion: Some(Level::Value(1)), ..Default::default() },
    )?);
    out.push(alg_entry(
        "bad-d2.json",
        &bad_d2(),
        Expect { verify: Some("fail".into()), witness: Some(vec![vec!["a".into()]]), ..Default::default() },
    )?);
    out.push(alg_entry(
        "dga.json",
        &dga(),
        Expect { verify: pass(), torsion: Some(Level::Missing(NotFound::NotFound)), ..Default::default() },
    )?);
    let mut e = ManifestEntry::new("dga-eps.json", "augmentation", Expect { verify: pass(), ..Default::default() });
    e.algebra = Some("dga.json".into());
    out.push(bundle_object(&ObjectDoc::from_augmentation(&dga_eps()), e)?);

    out.push(alg_entry("point.json", &point(), Expect { verify: pass(), ..Default::default() })?);
    let mut e = ManifestEntry::new("point-eps.json", "augmentation", Expect { verify: pass(), ..Default::default() });
    e.algebra = Some("point.json".into());
    out.push(bundle_object(&ObjectDoc::from_augmentation(&point_eps()), e)?);
    for (file, p) in [("point-pointed.json", point_pointed()), ("point-half-pointed.json", point_half_pointed())] {
        let mut e = ManifestEntry::new(
            file,
            "pointed",
            Expect {
                verify: pass(),
                order: Some(Level::Value(1)),
                tilde_order: Some(Level::Value(1)),
                ..Default::default()
            },
        );
        e.algebra = Some("point.json".into());
        e.augmentation = Some("point-eps.json".into());
        out.push(bundle_object(&ObjectDoc::from_pointed(&p), e)?);
    }
    let mut e = ManifestEntry::new("point-double.json", "morphism", Expect { verify: pass(), ..Default::default() });
    e.source = Some("point.json".into());
    e.target = Some("point.json".into());
    out.push(bundle_object(&ObjectDoc::from_morphism(&point_double()), e)?);
    let mut e = ManifestEntry::new(
        "point-fdot.json",
        "pointed-morphism",
        Expect {
            verify: pass(),
            source_order: Some(Level::Value(1)),
            order: Some(Level::Value(1)),
            ..Default::default()
        },
    );
    e.source = Some("point.json".into());
    e.target = Some("point.json".into());
    e.morphism = Some("point-double.json".into());
    e.source_pointed = Some("point-pointed.json".into());
    e.target_pointed = Some("point-half-pointed.json".into());
    e.augmentation = Some("point-eps.json".into());
    out.push(bundle_object(&ObjectDoc::from_pointed_morphism(&point_fdot()), e)?);

    for (file, f, target) in [("A1-to-A0.json", a1_to_a0(), "A0.json"), ("A1-rename.json", a1_rename(), "A1-renamed.json")] {
        let mut e = ManifestEntry::new(file, "morphism", Expect { verify: pass(), ..Default::default() });
        e.source = Some("A1.json".into());
        e.target = Some(target.into());
        out.push(bundle_object(&ObjectDoc::from_morphism(&f), e)?);
    }

    out.push(alg_entry("toy.json", &toy(), Expect { verify: pass(), ..Default::default() })?);
    let mut e = ManifestEntry::new("toy-mc.json", "mc", Expect { verify: pass(), deform: pass(), ..Default::default() });
    e.algebra = Some("toy.json".into());
    out.push(Bundled {
        contents: io::to_json(&McDoc::new(&toy().space, &toy_mc(), None))?,
        entry: e,
    });
    let mut e = ManifestEntry::new("toy-twist.json", "morphism", Expect { verify: pass(), deform: pass(), ..Default::default() });
    e.source = Some("toy.json".into());
    e.target = Some("toy.json".into());
    e.algebra = Some("toy-mc.json".into());
    e.truncation = Some(Truncation::new(3, 3, q(3), 2));
    out.push(bundle_object(&ObjectDoc::from_morphism(&toy_twist()), e)?);

    for (file, a, verdict) in [
        ("A1-ibl.json", a1_ibl(), "pass"),
        ("A1-ibl-lift.json", a1_ibl_lift(), "pass"),
        ("A1-ibl-bad.json", a1_ibl_bad(), "fail"),
    ] {
        let e = ManifestEntry::new(file, "ibl-algebra", Expect { verify: Some(verdict.into()), ..Default::default() });
        out.push(bundle_object(&ObjectDoc::from_ibl(&a), e)?);
    }

    out.push(Bundled {
        contents: io::to_json(&gluing_fixture())?,
        entry: ManifestEntry::new("gluing-21.json", "gluing-fixture", Expect { gluings: Some(21), ..Default::default() }),
    });
    Ok(out)
}

pub fn manifest() -> Result<Manifest> {
    Ok(Manifest {
        truncation: Truncation::default(),
        entries: bundle()?.into_iter().map(|b| b.entry).collect(),
    })
}

/// Writes every file and the manifest into `dir`.
pub fn write(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for b in bundle()? {
        io::write_atomic(&dir.join(&b.entry.file), &b.contents)?;
    }
    io::write_atomic(&dir.join(MANIFEST), &io::to_json(&manifest()?)?)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    io::read(&dir.join(MANIFEST))
}

/// One expectation of a manifest entry, compared with what was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub file: String,
    pub check: String,
    pub expected: String,
    pub actual: String,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

fn doc(dir: &Path, file: &Option<String>, role: &str) -> Result<ObjectDoc> {
    let f = file
        .as_ref()
        .ok_or_else(|| crate::error::Error::Parse(format!("manifest entry lacks its {role}")))?;
    io::read(&dir.join(f))
}

fn level_str(l: Level) -> String {
    match l {
        Level::Value(v) => v.to_string(),
        Level::Missing(_) => "not_found".into(),
    }
}

fn search_level<C: Scalar>(s: &crate::invariants::Search<C>, offset: usize) -> String {
    level_str(Level::of(s.k().map(|k| k - offset)))
}

fn sentence_of<C: DocScalar>(space: &Space, r: &crate::structures::Report<C>) -> String {
    r.witness
        .as_ref()
        .map(|s| serde_json::to_string(&io::sentence_doc(space, s)).unwrap_or_default())
        .unwrap_or_else(|| "none".into())
}

/// Recomputes every expectation of `entry` from the files in `dir`, at the
/// entry's own truncation if it has one and at `default` otherwise.
pub fn check_entry(dir: &Path, entry: &ManifestEntry, default: &Truncation) -> Result<Vec<Check>> {
    let t = entry.truncation.as_ref().unwrap_or(default);
    use crate::invariants as inv;
    use crate::structures as st;

    let ex = &entry.expect;
    let mut out = Vec::new();
    let mut push = |check: &str, expected: String, actual: String| {
        out.push(Check {
            file: entry.file.clone(),
            check: check.into(),
            expected,
            actual,
        })
    };
    let own = Some(entry.file.clone());

    match entry.object.as_str() {
        "algebra" => {
            let d = doc(dir, &own, "file")?;
            if d.coefficients == io::Ring::Novikov {
                let a: BLAlgebra<NovikovElem> = d.algebra()?;
                let r = st::verify_bl(&a, t);
                if let Some(v) = &ex.verify {
                    push("verify-bl", v.clone(), r.status.as_str().into());
                }
            } else {
                let a: BLAlgebra<Rational> = d.algebra()?;
                let r = st::verify_bl(&a, t);
                if let Some(v) = &ex.verify {
                    push("verify-bl", v.clone(), r.status.as_str().into());
                }
                if let Some(w) = &ex.witness {
                    push("witness", serde_json::to_string(w)?, sentence_of(&a.space, &r));
                }
                if let Some(l) = ex.torsion {
                    push("torsion", level_str(l), search_level(&inv::torsion(&a, t)?, 1));
                }
            }
        }
        "augmentation" => {
            let a: BLAlgebra<Rational> = doc(dir, &entry.algebra, "algebra")?.algebra()?;
            let e: Augmentation<Rational> = doc(dir, &own, "file")?.augmentation()?;
            if let Some(v) = &ex.verify {
                let r = st::verify_augmentation(&e, &a, t)?;
                push("verify-augmentation", v.clone(), r.status.as_str().into());
            }
        }
        "pointed" => {
            let a: BLAlgebra<Rational> = doc(dir, &entry.algebra, "algebra")?.algebra()?;
            let p: PointedMap<Rational> = doc(dir, &own, "file")?.pointed()?;
            if let Some(v) = &ex.verify {
                push("verify-pointed", v.clone(), st::verify_pointed(&p, &a, t)?.status.as_str().into());
            }
            if ex.order.is_some() || ex.tilde_order.is_some() {
                let e: Augmentation<Rational> = doc(dir, &entry.augmentation, "augmentation")?.augmentation()?;
                if let Some(l) = ex.order {
                    push("order", level_str(l), search_level(&inv::order(&a, &e, &p, t)?, 0));
                }
                if let Some(l) = ex.tilde_order {
                    push("tilde-order", level_str(l), search_level(&inv::tilde_order(&a, &e, &p, t)?, 0));
                }
            }
        }
        "morphism" => {
            let d = doc(dir, &own, "file")?;
            let (sd, td) = (doc(dir, &entry.source, "source")?, doc(dir, &entry.target, "target")?);
            if d.coefficients == io::Ring::Novikov {
                let f: BLMorphism<NovikovElem> = d.morphism()?;
                let (s, tg) = (sd.algebra()?, td.algebra()?);
                if let Some(v) = &ex.verify {
                    push("verify-morphism", v.clone(), st::verify_morphism(&f, &s, &tg, t)?.status.as_str().into());
                }
                if let Some(v) = &ex.deform {
                    let m: McDoc = io::read(&dir.join(entry.algebra.as_deref().unwrap_or_default()))?;
                    let mc = m.element(t)?;
                    let r = crate::mc::deform_morphism(&f, &s, &tg, &mc, t)?;
                    push("deform-morphism", v.clone(), if r.passed() { "pass" } else { "fail" }.into());
                }
            } else {
                let f: BLMorphism<Rational> = d.morphism()?;
                let (s, tg) = (sd.algebra()?, td.algebra()?);
                if let Some(v) = &ex.verify {
                    push("verify-morphism", v.clone(), st::verify_morphism(&f, &s, &tg, t)?.status.as_str().into());
                }
            }
        }
        "pointed-morphism" => {
            let fd: PointedMorphism<Rational> = doc(dir, &own, "file")?.pointed_morphism()?;
            let f: BLMorphism<Rational> = doc(dir, &entry.morphism, "morphism")?.morphism()?;
            let s: BLAlgebra<Rational> = doc(dir, &entry.source, "source")?.algebra()?;
            let tg: BLAlgebra<Rational> = doc(dir, &entry.target, "target")?.algebra()?;
            let p: PointedMap<Rational> = doc(dir, &entry.source_pointed, "source pointed map")?.pointed()?;
            let qd: PointedMap<Rational> = doc(dir, &entry.target_pointed, "target pointed map")?.pointed()?;
            let compat = st::verify_compat(&f, &fd, &s, &tg, &p, &qd, t)?;
            if let Some(v) = &ex.verify {
                push("verify-compat", v.clone(), compat.status.as_str().into());
            }
            if compat.passed() && (ex.order.is_some() || ex.source_order.is_some()) {
                let e: Augmentation<Rational> = doc(dir, &entry.augmentation, "augmentation")?.augmentation()?;
                let r = inv::order_functoriality(&f, &fd, &s, &tg, &e, &p, &qd, t)?;
                if let Some(l) = ex.source_order {
                    push("source-order", level_str(l), search_level(&r.source, 0));
                }
                if let Some(l) = ex.order {
                    push("target-order", level_str(l), search_level(&r.target, 0));
                }
            }
        }
        "mc" => {
            let a: BLAlgebra<NovikovElem> = doc(dir, &entry.algebra, "algebra")?.algebra()?;
            let m: McDoc = io::read(&dir.join(&entry.file))?;
            let mc = m.element(t)?;
            if let Some(v) = &ex.verify {
                push("mc-verify", v.clone(), crate::mc::verify_mc(&a, &mc, t)?.status.as_str().into());
            }
            if let Some(v) = &ex.deform {
                let d = crate::mc::deform_structure(&a, &mc, t)?;
                push("mc-deform", v.clone(), if d.passed() { "pass" } else { "fail" }.into());
            }
        }
        "ibl-algebra" => {
            let a = doc(dir, &own, "file")?.ibl()?;
            if let Some(v) = &ex.verify {
                push("verify-ibl", v.clone(), crate::ibl::verify_ibl(&a, t).status.as_str().into());
                push("verify-ibl-sv", v.clone(), crate::ibl::verify_ibl_sv(&a, t).status.as_str().into());
            }
        }
        "gluing-fixture" => {
            let g: GluingDoc = io::read(&dir.join(&entry.file))?;
            if let Some(n) = ex.gluings {
                push("gluings", n.to_string(), g.count()?.to_string());
            }
        }
        other => {
            return Err(crate::error::Error::Parse(format!("unknown catalog object {other:?}")));
        }
    }
    Ok(out)
}
