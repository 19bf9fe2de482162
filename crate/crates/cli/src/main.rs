use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use blinfty::basis::Truncation;
use blinfty::catalog;
use blinfty::error::{Error, Result};
use blinfty::ibl::{self, IBLAlgebra, H};
use blinfty::invariants as inv;
use blinfty::io::{self, ChecksDoc, DocScalar, GridDoc, McDoc, ObjectDoc, ReportDoc, Ring, SearchDoc};
use blinfty::mc;
use blinfty::scalar::{NovikovElem, Rational};
use blinfty::space::Space;
use blinfty::structures::{self as st, Augmentation, BLAlgebra, BLMorphism, MultiPointedMap, PointedMap, Report};

#[derive(Parser)]
#[command(name = "blinfty", version, about = "Exact checks and invariants for BL-infinity and IBL-infinity algebras")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    trunc: TruncArgs,
    /// Also write the report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TruncArgs {
    /// Longest word L.
    #[arg(long, global = true, default_value_t = 4)]
    max_word_len: usize,
    /// Longest sentence K.
    #[arg(long, global = true, default_value_t = 4)]
    max_sentence_len: usize,
    /// Weight and T-exponent cutoff W, a rational.
    #[arg(long, global = true, default_value = "3")]
    weight_cutoff: Rational,
    /// Highest power of hbar kept, G.
    #[arg(long, global = true, default_value_t = 2)]
    genus_cap: u32,
}

impl TruncArgs {
    fn resolve(&self) -> Truncation {
        Truncation::new(self.max_word_len, self.max_sentence_len, self.weight_cutoff.clone(), self.genus_cap)
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Checks p-hat ∘ p-hat = 0.
    VerifyBl { algebra: PathBuf },
    /// Checks the IBL equation in both formulations.
    VerifyIbl { algebra: PathBuf },
    /// Checks that a morphism intertwines the structure maps.
    VerifyMorphism { morphism: PathBuf, source: PathBuf, target: PathBuf },
    /// Checks that a pointed map commutes with p-hat.
    VerifyPointed { pointed: PathBuf, algebra: PathBuf },
    /// Checks compatibility of (phi, phi•) with pointed maps p•, q•.
    VerifyCompat {
        pointed_morphism: PathBuf,
        morphism: PathBuf,
        source: PathBuf,
        target: PathBuf,
        source_pointed: PathBuf,
        target_pointed: PathBuf,
    },
    /// Composes two morphisms, first then second.
    Compose { first: PathBuf, second: PathBuf },
    /// Linearizes an algebra along an augmentation.
    Linearize { algebra: PathBuf, augmentation: PathBuf },
    /// Algebraic torsion.
    Torsion { algebra: PathBuf },
    /// Order of a pointed map relative to an augmentation.
    Order { algebra: PathBuf, augmentation: PathBuf, pointed: PathBuf },
    /// The sentence-length variant of the order.
    TildeOrder { algebra: PathBuf, augmentation: PathBuf, pointed: PathBuf },
    /// Order of a multi-pointed map with words of length at most m.
    MultiOrder {
        algebra: PathBuf,
        augmentation: PathBuf,
        pointed: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Spectral invariant over the Novikov ring.
    Spectral {
        algebra: PathBuf,
        augmentation: PathBuf,
        pointed: PathBuf,
        #[arg(long)]
        l: usize,
    },
    /// Checks the Maurer-Cartan equation, and the pointed one if present.
    McVerify {
        algebra: PathBuf,
        mc: PathBuf,
        #[arg(long)]
        pointed: Option<PathBuf>,
    },
    /// Deforms the structure maps by an MC element.
    McDeform { algebra: PathBuf, mc: PathBuf },
    /// Pushes an MC element along a morphism and deforms the morphism.
    McPushforward { morphism: PathBuf, source: PathBuf, target: PathBuf, mc: PathBuf },
    /// (n, m)_k torsion of an IBL algebra.
    GridTorsion {
        algebra: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
    },
    /// Turns an (n, m)_k witness into an (n + m, 0)_k witness.
    CmTransform { algebra: PathBuf, witness: PathBuf },
    /// Re-checks a torsion or grid witness from an earlier report.
    ReplayWitness { algebra: PathBuf, witness: PathBuf },
    /// Lists the bundled catalog, or checks it against its manifest.
    Catalog {
        /// Catalog directory; the bundled objects are written there if it
        /// has no manifest.
        dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
    },
}

/// A finished command: the report and whether every asserted check held.
struct Outcome {
    doc: serde_json::Value,
    ok: bool,
    summary: String,
}

impl Outcome {
    fn new<T: serde::Serialize>(doc: &T, ok: bool, summary: String) -> Result<Self> {
        Ok(Outcome {
            doc: serde_json::to_value(doc)?,
            ok,
            summary,
        })
    }

    fn checks(doc: ChecksDoc) -> Result<Self> {
        let summary = doc
            .reports
            .iter()
            .map(|r| format!("{}: {} ({} checked)", r.check, r.status, r.checked))
            .collect::<Vec<_>>()
            .join("\n");
        let ok = doc.status == "pass";
        Self::new(&doc, ok, summary)
    }
}

fn object(path: &Path) -> Result<ObjectDoc> {
    io::read(path)
}

fn report<C: DocScalar>(check: &str, space: &Space, r: &Report<C>) -> ReportDoc {
    ReportDoc::new(check, space, r)
}

fn verify_bl<C: DocScalar>(d: &ObjectDoc, t: &Truncation) -> Result<Outcome> {
    let a: BLAlgebra<C> = d.algebra()?;
    Outcome::checks(ChecksDoc::new("verify-bl", t, vec![report("verify-bl", &a.space, &st::verify_bl(&a, t))]))
}

fn verify_morphism<C: DocScalar>(f: &ObjectDoc, s: &ObjectDoc, g: &ObjectDoc, t: &Truncation) -> Result<Outcome> {
    let f: BLMorphism<C> = f.morphism()?;
    let (s, g): (BLAlgebra<C>, BLAlgebra<C>) = (s.algebra()?, g.algebra()?);
    let r = st::verify_morphism(&f, &s, &g, t)?;
    Outcome::checks(ChecksDoc::new("verify-morphism", t, vec![report("verify-morphism", &s.space, &r)]))
}

fn verify_pointed<C: DocScalar>(p: &ObjectDoc, a: &ObjectDoc, t: &Truncation) -> Result<Outcome> {
    let p: PointedMap<C> = p.pointed()?;
    let a: BLAlgebra<C> = a.algebra()?;
    let r = st::verify_pointed(&p, &a, t)?;
    Outcome::checks(ChecksDoc::new("verify-pointed", t, vec![report("verify-pointed", &a.space, &r)]))
}

fn verify_compat<C: DocScalar>(docs: [ObjectDoc; 6], t: &Truncation) -> Result<Outcome> {
    let [fd, f, s, g, p, q] = docs;
    let (s, g): (BLAlgebra<C>, BLAlgebra<C>) = (s.algebra()?, g.algebra()?);
    let r = st::verify_compat(&f.morphism()?, &fd.pointed_morphism()?, &s, &g, &p.pointed()?, &q.pointed()?, t)?;
    Outcome::checks(ChecksDoc::new("verify-compat", t, vec![report("verify-compat", &s.space, &r)]))
}

fn compose<C: DocScalar>(f: &ObjectDoc, g: &ObjectDoc, t: &Truncation) -> Result<Outcome> {
    let h: BLMorphism<C> = st::compose(&f.morphism()?, &g.morphism()?, t)?;
    let doc = ChecksDoc::new("compose", t, vec![]).with_result(&ObjectDoc::from_morphism(&h))?;
    Outcome::new(&doc, true, format!("composite has {} components", h.components.len()))
}

fn linearize<C: DocScalar>(a: &ObjectDoc, e: &ObjectDoc, t: &Truncation) -> Result<Outcome> {
    let a: BLAlgebra<C> = a.algebra()?;
    let e: Augmentation<C> = e.augmentation()?;
    let lin = st::linearize(&a, &e, t)?;
    let mut doc = ChecksDoc::new("linearize", t, vec![report("verify-bl", &a.space, &lin.report)]);
    let constants: Vec<io::WordDoc> = lin.constant_terms.iter().map(|w| io::word_doc(&a.space, w)).collect();
    if !constants.is_empty() {
        doc.status = "fail".into();
    }
    let doc = doc.with_result(&json!({
        "algebra": ObjectDoc::from_algebra(&lin.algebra),
        "constant_terms": constants,
    }))?;
    Outcome::checks(doc)
}

fn search_outcome(doc: SearchDoc) -> Result<Outcome> {
    let summary = match &doc.value {
        Some(v) => match doc.k {
            Some(k) => format!("{}: {} at k = {k}, value {v}", doc.invariant, doc.status),
            None => format!("{}: {}, value {v}", doc.invariant, doc.status),
        },
        None => format!("{}: not found within the truncation", doc.invariant),
    };
    Outcome::new(&doc, true, summary)
}

fn rational_algebra(d: &ObjectDoc) -> Result<BLAlgebra<Rational>> {
    d.algebra()
}

fn order(which: &str, a: &Path, e: &Path, p: &Path, t: &Truncation) -> Result<Outcome> {
    let a = rational_algebra(&object(a)?)?;
    let e: Augmentation<Rational> = object(e)?.augmentation()?;
    let p: PointedMap<Rational> = object(p)?.pointed()?;
    let r = if which == "order" {
        inv::order(&a, &e, &p, t)?
    } else {
        inv::tilde_order(&a, &e, &p, t)?
    };
    search_outcome(SearchDoc::new(which, &a.space, &r, |k| k as i64, t))
}

fn novikov_algebra(path: &Path) -> Result<BLAlgebra<NovikovElem>> {
    object(path)?.algebra()
}

fn mc_element(path: &Path, t: &Truncation) -> Result<(McDoc, mc::MCElement)> {
    let d: McDoc = io::read(path)?;
    let m = d.element(t)?;
    Ok((d, m))
}

fn verdict(passed: bool) -> String {
    if passed { "pass" } else { "fail" }.into()
}

fn ibl_algebra(path: &Path) -> Result<IBLAlgebra> {
    object(path)?.ibl()
}

fn grid_outcome(doc: GridDoc) -> Result<Outcome> {
    let summary = format!("({}, {})_{} torsion: {}", doc.n, doc.m, doc.k, doc.status);
    Outcome::new(&doc, true, summary)
}

fn replay(a_path: &Path, w_path: &Path, t: &Truncation) -> Result<Outcome> {
    let v: serde_json::Value = io::read(w_path)?;
    let witness = v.get("witness").cloned().ok_or_else(|| Error::Parse("the report carries no witness".into()))?;
    let witness: io::ExpressionDoc = serde_json::from_value(witness)?;
    if v.get("n").is_some() {
        let d: GridDoc = serde_json::from_value(v.clone())?;
        let a = ibl_algebra(a_path)?;
        let x = io::parse_expression::<H>(&a.space, &witness)?;
        let ok = ibl::check_grid_witness(&a, &x, d.n, d.m, d.k);
        let doc = json!({"command": "replay-witness", "status": verdict(ok), "n": d.n, "m": d.m, "k": d.k, "bounds": t});
        return Outcome::new(&doc, ok, format!("grid witness re-check: {}", verdict(ok)));
    }
    let d: SearchDoc = serde_json::from_value(v)?;
    if d.invariant != "torsion" {
        return Err(Error::Config(format!("cannot replay a {} witness", d.invariant)));
    }
    let k = d.k.ok_or_else(|| Error::Parse("the report has no level k".into()))?;
    let a = rational_algebra(&object(a_path)?)?;
    let x = io::parse_expression::<Rational>(&a.space, &witness)?;
    let ok = inv::check_torsion_witness(&a, &x, k);
    let doc = json!({"command": "replay-witness", "status": verdict(ok), "invariant": "torsion", "k": k, "bounds": t});
    Outcome::new(&doc, ok, format!("p-hat(x) = 1 with x in E^{k}: {}", verdict(ok)))
}

fn catalog_cmd(dir: Option<PathBuf>, check: bool, t: &Truncation) -> Result<Outcome> {
    let manifest = match &dir {
        Some(d) if d.join(catalog::MANIFEST).exists() => catalog::load_manifest(d)?,
        Some(d) => {
            catalog::write(d)?;
            catalog::manifest()?
        }
        None => catalog::manifest()?,
    };
    if !check {
        let files: Vec<&str> = manifest.entries.iter().map(|e| e.file.as_str()).collect();
        return Outcome::new(&manifest, true, format!("{} bundled files: {}", files.len(), files.join(", ")));
    }
    let dir = dir.ok_or_else(|| Error::Config("--check needs a catalog directory".into()))?;
    let mut checks = Vec::new();
    for e in &manifest.entries {
        checks.extend(catalog::check_entry(&dir, e, &manifest.truncation)?);
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.holds())
        .map(|c| format!("{} {}: expected {}, got {}", c.file, c.check, c.expected, c.actual))
        .collect();
    let ok = failed.is_empty();
    let doc = json!({"command": "catalog", "status": verdict(ok), "bounds": t, "checks": checks});
    let summary = if ok { format!("{} catalog checks hold", checks.len()) } else { failed.join("\n") };
    Outcome::new(&doc, ok, summary)
}

fn run(verb: Verb, t: &Truncation) -> Result<Outcome> {
    match verb {
        Verb::VerifyBl { algebra } => {
            let d = object(&algebra)?;
            match d.coefficients {
                Ring::Rational => verify_bl::<Rational>(&d, t),
                Ring::Novikov => verify_bl::<NovikovElem>(&d, t),
            }
        }
        Verb::VerifyIbl { algebra } => {
            let a = ibl_algebra(&algebra)?;
            let ev = ibl::verify_ibl(&a, t);
            let sv = ibl::verify_ibl_sv(&a, t);
            let mut doc = ChecksDoc::new(
                "verify-ibl",
                t,
                vec![report("verify-ibl", &a.space, &ev), report("verify-ibl-sv", &a.space, &sv)],
            );
            if let Some(b) = ibl::p2_block(&ev) {
                doc = doc.with_result(&json!({"p2_block": {"inputs": b.inputs, "outputs": b.outputs, "genus": b.genus}}))?;
            }
            Outcome::checks(doc)
        }
        Verb::VerifyMorphism { morphism, source, target } => {
            let (f, s, g) = (object(&morphism)?, object(&source)?, object(&target)?);
            match f.coefficients {
                Ring::Rational => verify_morphism::<Rational>(&f, &s, &g, t),
                Ring::Novikov => verify_morphism::<NovikovElem>(&f, &s, &g, t),
            }
        }
        Verb::VerifyPointed { pointed, algebra } => {
            let (p, a) = (object(&pointed)?, object(&algebra)?);
            match a.coefficients {
                Ring::Rational => verify_pointed::<Rational>(&p, &a, t),
                Ring::Novikov => verify_pointed::<NovikovElem>(&p, &a, t),
            }
        }
        Verb::VerifyCompat {
            pointed_morphism,
            morphism,
            source,
            target,
            source_pointed,
            target_pointed,
        } => {
            let docs = [
                object(&pointed_morphism)?,
                object(&morphism)?,
                object(&source)?,
                object(&target)?,
                object(&source_pointed)?,
                object(&target_pointed)?,
            ];
            if docs.iter().any(|d| d.coefficients == Ring::Novikov) {
                verify_compat::<NovikovElem>(docs, t)
            } else {
                verify_compat::<Rational>(docs, t)
            }
        }
        Verb::Compose { first, second } => {
            let (f, g) = (object(&first)?, object(&second)?);
            if f.coefficients == Ring::Novikov || g.coefficients == Ring::Novikov {
                compose::<NovikovElem>(&f, &g, t)
            } else {
                compose::<Rational>(&f, &g, t)
            }
        }
        Verb::Linearize { algebra, augmentation } => {
            let (a, e) = (object(&algebra)?, object(&augmentation)?);
            if a.coefficients == Ring::Novikov || e.coefficients == Ring::Novikov {
                linearize::<NovikovElem>(&a, &e, t)
            } else {
                linearize::<Rational>(&a, &e, t)
            }
        }
        Verb::Torsion { algebra } => {
            let a = rational_algebra(&object(&algebra)?)?;
            let r = inv::torsion(&a, t)?;
            search_outcome(SearchDoc::new("torsion", &a.space, &r, |k| k as i64 - 1, t))
        }
        Verb::Order { algebra, augmentation, pointed } => order("order", &algebra, &augmentation, &pointed, t),
        Verb::TildeOrder { algebra, augmentation, pointed } => {
            order("tilde-order", &algebra, &augmentation, &pointed, t)
        }
        Verb::MultiOrder { algebra, augmentation, pointed, m } => {
            let a = rational_algebra(&object(&algebra)?)?;
            let e: Augmentation<Rational> = object(&augmentation)?.augmentation()?;
            let mp: MultiPointedMap<Rational> = object(&pointed)?.multi_pointed()?;
            let r = inv::multipoint_order(&a, &e, &mp, m, t)?;
            search_outcome(SearchDoc::new("multi-order", &a.space, &r, |k| k as i64, t))
        }
        Verb::Spectral { algebra, augmentation, pointed, l } => {
            let a = novikov_algebra(&algebra)?;
            let e: Augmentation<NovikovElem> = object(&augmentation)?.augmentation()?;
            let mp: MultiPointedMap<NovikovElem> = object(&pointed)?.multi_pointed()?;
            let r = inv::spectral_invariant(&a, &e, &mp, l, t)?;
            search_outcome(SearchDoc::spectral(&a.space, &r, t))
        }
        Verb::McVerify { algebra, mc: path, pointed } => {
            let a = novikov_algebra(&algebra)?;
            let (d, m) = mc_element(&path, t)?;
            let mut reports = vec![report("mc-verify", &a.space, &mc::verify_mc(&a, &m, t)?)];
            match (pointed, d.pointed_element()?) {
                (Some(p), Some(dot)) => {
                    let p: PointedMap<NovikovElem> = object(&p)?.pointed()?;
                    reports.push(report("pointed-mc-verify", &a.space, &mc::verify_pointed_mc(&a, &p, &m, &dot, t)?));
                }
                (None, None) => {}
                _ => return Err(Error::Config("a pointed MC check needs both a pointed map and mc•".into())),
            }
            Outcome::checks(ChecksDoc::new("mc-verify", t, reports))
        }
        Verb::McDeform { algebra, mc: path } => {
            let a = novikov_algebra(&algebra)?;
            let (_, m) = mc_element(&path, t)?;
            let d = mc::deform_structure(&a, &m, t)?;
            let mut doc = ChecksDoc::new(
                "mc-deform",
                t,
                vec![
                    report("conjugation", &a.space, &d.conjugation),
                    report("intertwining", &a.space, &d.intertwining),
                    report("square-zero", &a.space, &d.square_zero),
                ],
            );
            if !d.constant_independent {
                doc.status = "fail".into();
            }
            let doc = doc.with_result(&json!({
                "algebra": ObjectDoc::from_algebra(&d.algebra),
                "constant_independent": d.constant_independent,
            }))?;
            Outcome::checks(doc)
        }
        Verb::McPushforward { morphism, source, target, mc: path } => {
            let f: BLMorphism<NovikovElem> = object(&morphism)?.morphism()?;
            let (s, g) = (novikov_algebra(&source)?, novikov_algebra(&target)?);
            let (_, m) = mc_element(&path, t)?;
            let d = mc::deform_morphism(&f, &s, &g, &m, t)?;
            let sp = &s.space;
            let doc = ChecksDoc::new(
                "mc-pushforward",
                t,
                vec![
                    report("exp-identity", &g.space, &d.pushforward.exp_identity),
                    report("pushed-mc", &g.space, &d.pushforward.is_mc),
                    report("source-conjugation", sp, &d.source.conjugation),
                    report("target-conjugation", &g.space, &d.target.conjugation),
                    report("morphism-conjugation", sp, &d.conjugation),
                    report("morphism-intertwining", sp, &d.intertwining),
                ],
            );
            let doc = doc.with_result(&json!({
                "mc": McDoc::new(&g.space, &d.pushforward.mc, None),
                "morphism": ObjectDoc::from_morphism(&d.morphism),
            }))?;
            Outcome::checks(doc)
        }
        Verb::GridTorsion { algebra, n, m, k } => {
            let a = ibl_algebra(&algebra)?;
            let r = ibl::grid_torsion(&a, n, m, k, t)?;
            grid_outcome(GridDoc::new(&a.space, n, m, k, &r, t))
        }
        Verb::CmTransform { algebra, witness } => {
            let a = ibl_algebra(&algebra)?;
            let g: GridDoc = io::read(&witness)?;
            let w = g.witness.as_ref().ok_or_else(|| Error::Parse("the grid report carries no witness".into()))?;
            let x = io::parse_expression::<H>(&a.space, w)?;
            let y = ibl::cm_transform(&a, &x, g.n, g.m, Some(g.k))?;
            let n = g.n + g.m as u32;
            let ok = ibl::check_grid_witness(&a, &y, n, 0, g.k);
            let doc = GridDoc {
                status: if ok { "exact_at" } else { "fail" }.into(),
                n,
                m: 0,
                k: g.k,
                degenerate: y.is_zero(),
                witness: Some(io::expression_doc(&a.space, &y)),
                bounds: t.clone(),
            };
            let summary = format!("({}, 0)_{} witness re-check: {}", n, g.k, verdict(ok));
            Outcome::new(&doc, ok, summary)
        }
        Verb::ReplayWitness { algebra, witness } => replay(&algebra, &witness, t),
        Verb::Catalog { dir, check } => catalog_cmd(dir, check, t),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::Precondition(_) | Error::Internal(_) => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) | Error::Json(_) => "parse",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::Precondition(_) => "precondition",
        Error::Internal(_) => "internal",
    }
}

fn threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("BLINFTY_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("BLINFTY_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("BLINFTY_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn emit(doc: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = io::to_json(doc)?;
    if let Some(p) = out {
        io::write_atomic(p, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let t = cli.trunc.resolve();
    if let Err(msg) = threads() {
        let doc = json!({"status": "error", "kind": "config", "message": msg});
        let _ = emit(&doc, None);
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let (doc, code, summary) = match run(cli.verb, &t) {
        Ok(o) => (o.doc, if o.ok { 0 } else { 1 }, o.summary),
        Err(e) => (
            json!({"status": "error", "kind": error_kind(&e), "message": e.to_string(), "bounds": t}),
            exit_code(&e),
            format!("error: {e}"),
        ),
    };
    if let Err(e) = emit(&doc, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    eprintln!("{summary}");
    ExitCode::from(code)
}
