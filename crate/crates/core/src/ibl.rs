//! IBL-infinity algebras: operations `p^{k,l,g}` over `k[[hbar]]`.
//!
//! Two assemblies of `p-hat` are provided. The sentence-level one glues a
//! single component to any letters of `EV[[hbar]]` and counts cycles; the
//! word-level one acts on `SV[[hbar]]` only, with weight `hbar^{k+g-1}`.
//! They are implemented separately so each can check the other.

use std::collections::BTreeMap;

use itertools::Itertools;
use rayon::prelude::*;

use crate::assembler::{ComponentKind, ComponentMap, HatIbl, HatMap, Operator, Then};
use crate::basis::{self, BasisSpec, Truncation};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::{HbarSeries, Rational, Scalar};
use crate::space::{koszul_sign, Expression, Parity, Sentence, Space, Word};
use crate::structures::{check_on_basis, difference, BLAlgebra, Report};

pub type H = HbarSeries<Rational>;

/// `(V, {p^{k,l,g}})`; `l = 0` (curved) and `g > 0` are allowed.
#[derive(Clone, Debug)]
pub struct IBLAlgebra {
    pub space: Space,
    pub components: Vec<ComponentMap<Rational>>,
    op: Operator<H>,
}

impl IBLAlgebra {
    pub fn new(space: Space, components: Vec<ComponentMap<Rational>>) -> Result<Self> {
        for c in &components {
            if c.kind != ComponentKind::Structure {
                return Err(Error::Parse(format!("unexpected component kind {}", c.kind.as_str())));
            }
            c.validate(&space, &space)?;
        }
        let op = Operator::from_components_with(Parity::Odd, &components, |c, g| Ok(H::monomial(c.clone(), g)))?;
        Ok(IBLAlgebra { space, components, op })
    }

    /// A BL-infinity algebra viewed as a genus-0 IBL-infinity algebra.
    pub fn from_bl(a: &BLAlgebra<Rational>) -> Result<Self> {
        Self::new(a.space.clone(), a.components.clone())
    }

    pub fn with_component(mut self, c: ComponentMap<Rational>) -> Result<Self> {
        self.components.push(c);
        Self::new(self.space, self.components)
    }

    /// Some component has an output of length zero.
    pub fn curved(&self) -> bool {
        self.op.entries().any(|(_, poly)| poly.keys().any(Word::is_empty))
    }

    pub fn operator(&self) -> &Operator<H> {
        &self.op
    }

    pub fn hat(&self) -> HatIbl<'_, H> {
        HatIbl::new(&self.op)
    }

    /// Largest genus label of a component.
    pub fn max_genus(&self) -> u32 {
        self.components.iter().map(|c| c.genus).max().unwrap_or(0)
    }
}

/// Sentences of nonempty words with at most `L` letters in total.
fn ev_basis(space: &Space, t: &Truncation) -> Vec<Sentence> {
    let spec = BasisSpec {
        min_word_len: 1,
        max_word_len: t.max_word_len,
        max_sentence_len: t.max_sentence_len,
        max_letters: Some(t.max_word_len),
        max_weight: Some(t.weight_cutoff.clone()),
    };
    basis::sentences(space, &spec)
}

/// `p-hat ∘ p-hat = 0` on `EV[[hbar]]`, exactly in `hbar`.
pub fn verify_ibl(a: &IBLAlgebra, t: &Truncation) -> Report<H> {
    let hat = a.hat();
    let sq = Then {
        first: &hat,
        second: &hat,
    };
    let basis = ev_basis(&a.space, t);
    check_on_basis(&basis, |s| sq.apply_checked(&Expression::term(s.clone(), H::one())))
}

/// `p-hat` on one word: every `k`-subset of its letters goes into `p^{k,l,g}`,
/// the output is multiplied with the remaining letters, weight `hbar^{k+g-1}`.
pub fn sv_apply(a: &IBLAlgebra, w: &Word, coeff: &H, out: &mut BTreeMap<Word, H>) {
    let letters = w.letters();
    let odd: Vec<bool> = letters.iter().map(|l| l.is_odd()).collect();
    let n = letters.len();
    for &k in a.op.arities() {
        if k > n {
            break;
        }
        for chosen in (0..n).combinations(k) {
            let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            let order: Vec<usize> = chosen.iter().chain(&rest).copied().collect();
            let move_sign = koszul_sign(&order, &odd);
            let Some((key_sign, key)) = Word::from_letters(chosen.iter().map(|&i| letters[i]).collect()) else {
                continue;
            };
            let Some(outputs) = a.op.get(&key) else {
                continue;
            };
            for (o, c) in outputs {
                let merged: Vec<_> = o.letters().iter().copied().chain(rest.iter().map(|&i| letters[i])).collect();
                let Some((merge_sign, word)) = Word::from_letters(merged) else {
                    continue;
                };
                let sign = move_sign * key_sign * merge_sign;
                let value = sign.apply(coeff.times(c).times(&H::monomial(Rational::one(), (k - 1) as u32)));
                let slot = out.entry(word).or_insert_with(H::zero);
                *slot = slot.plus(&value);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
}

fn sv_square(a: &IBLAlgebra, w: &Word) -> BTreeMap<Word, H> {
    let mut mid = BTreeMap::new();
    sv_apply(a, w, &H::one(), &mut mid);
    let mut out = BTreeMap::new();
    for (v, c) in &mid {
        // p-hat(1) = 0
        if !v.is_empty() {
            sv_apply(a, v, c, &mut out);
        }
    }
    out
}

/// `p-hat ∘ p-hat = 0` on `SV[[hbar]]`: single words of length `<= L`.
pub fn verify_ibl_sv(a: &IBLAlgebra, t: &Truncation) -> Report<H> {
    let words = basis::words(&a.space, 1, t.max_word_len, Some(&t.weight_cutoff));
    let basis: Vec<Sentence> = words.into_iter().map(Sentence::single).collect();
    check_on_basis(&basis, |s| {
        let r = sv_square(a, &s.words()[0]);
        (r.into_iter().map(|(w, c)| (Sentence::single(w), c)).collect(), false)
    })
}

/// Signature `(a, b, genus)` of a two-level breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct P2Block {
    pub inputs: usize,
    pub outputs: usize,
    pub genus: i64,
}

/// The first nonzero block of a failing word-level check. On the shortest
/// failing word, of length `n`, every shorter block vanishes, so a residue
/// term of length `m` at `hbar^N` belongs to the block `(n, m, N - n + 1)`.
pub fn p2_block(report: &Report<H>) -> Option<P2Block> {
    let n = report.witness.as_ref()?.letter_count();
    let residue = report.residue.as_ref()?;
    residue
        .iter()
        .flat_map(|(s, c)| {
            let m = s.letter_count();
            c.coeffs().keys().map(move |&g| P2Block {
                inputs: n,
                outputs: m,
                genus: g as i64 - n as i64 + 1,
            })
        })
        .min()
}

/// The genus-0 components as a BL-infinity algebra.
pub fn genus0_projection(a: &IBLAlgebra) -> Result<BLAlgebra<Rational>> {
    let comps = a.components.iter().filter(|c| c.genus == 0).cloned().collect();
    BLAlgebra::new(a.space.clone(), comps)
}

fn pi0(e: &Expression<H>) -> Expression<Rational> {
    e.iter().map(|(s, c)| (s.clone(), c.coefficient(0))).collect()
}

/// `π_0 ∘ p-hat` on `EV` equals the BL assembly of the genus-0 part.
pub fn verify_pi0(a: &IBLAlgebra, t: &Truncation) -> Result<Report<Rational>> {
    let bl = genus0_projection(a)?;
    let p0 = bl.hat();
    let hat = a.hat();
    let basis = ev_basis(&a.space, t);
    Ok(check_on_basis(&basis, |s| {
        let (full, esc) = hat.apply_checked(&Expression::term(s.clone(), H::one()));
        (pi0(&full).minus(&p0.apply_sentence(s)), esc)
    }))
}

/// `w_hbar(v)`: the lowest power of `hbar` present, `None` for zero.
pub fn hbar_width(e: &Expression<H>) -> Option<u32> {
    e.iter().filter_map(|(_, c)| c.order()).min()
}

/// Checks `w_hbar(p-hat(v)) >= w_hbar(v)` for `v = hbar^j s`, `j <= G`, on
/// every basis sentence, and again for `v = p-hat(hbar^j s)`. Returns the
/// number of inputs evaluated, or the first violating input.
pub fn check_hbar_width(a: &IBLAlgebra, t: &Truncation) -> std::result::Result<usize, Expression<H>> {
    let hat = a.hat();
    let basis = ev_basis(&a.space, t);
    let inputs: Vec<Expression<H>> = basis
        .iter()
        .flat_map(|s| (0..=t.genus_cap).map(move |j| Expression::term(s.clone(), H::monomial(Rational::one(), j))))
        .collect();
    let bad: Vec<Option<Expression<H>>> = inputs
        .par_iter()
        .map(|v| {
            let y = hat.apply(v);
            let z = hat.apply(&y);
            let ok = |input: &Expression<H>, output: &Expression<H>| match (hbar_width(input), hbar_width(output)) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(i), Some(o)) => o >= i,
            };
            if !ok(v, &y) {
                Some(v.clone())
            } else if !ok(&y, &z) {
                Some(y)
            } else {
                None
            }
        })
        .collect();
    match bad.into_iter().flatten().next() {
        Some(v) => Err(v),
        None => Ok(inputs.len() * 2),
    }
}

/// `π_k`: drops powers of `hbar` above `k`.
pub fn pi_k(e: &Expression<H>, k: u32) -> Expression<H> {
    e.map_coefficients(|c| H::from_coeffs(c.coeffs().range(..=k).map(|(g, x)| (*g, x.clone())), None))
}

fn hbar_unit(n: u32) -> Expression<H> {
    Expression::term(Sentence::unit(), H::monomial(Rational::one(), n))
}

/// Outcome of a search for `(n, m)_k` torsion.
#[derive(Clone, Debug)]
pub enum GridTorsion {
    /// `p-hat_k(x) = hbar^n` with `x` in `E^{m+1} V[[hbar]]_k`. A degenerate
    /// witness is `x = 0`, valid because `hbar^n = 0` there when `n > k`.
    Witness {
        n: u32,
        m: usize,
        k: u32,
        x: Expression<H>,
        degenerate: bool,
    },
    NotFound {
        bounds: Truncation,
    },
}

impl GridTorsion {
    pub fn found(&self) -> bool {
        matches!(self, GridTorsion::Witness { .. })
    }
}

/// Re-checks `π_k p-hat(x) = hbar^n` with `x` in `E^{m+1}`.
pub fn check_grid_witness(a: &IBLAlgebra, x: &Expression<H>, n: u32, m: usize, k: u32) -> bool {
    let target = if n > k { Expression::zero() } else { hbar_unit(n) };
    x.max_sentence_len() <= m + 1 && pi_k(x, k) == *x && pi_k(&a.hat().apply(x), k) == target
}

/// Solves `p-hat_k(x) = hbar^n` over `E^{m+1} V[[hbar]]_k` within `t`.
pub fn grid_torsion(a: &IBLAlgebra, n: u32, m: usize, k: u32, t: &Truncation) -> Result<GridTorsion> {
    if n > k {
        return Ok(GridTorsion::Witness {
            n,
            m,
            k,
            x: Expression::zero(),
            degenerate: true,
        });
    }
    let hat = a.hat();
    let basis = basis::sentences(&a.space, &BasisSpec::filtration(t, m + 1));
    let images: Vec<Expression<H>> = basis.par_iter().map(|s| hat.apply_sentence(s)).collect();
    let mut ech = Echelon::new();
    let mut unknowns = Vec::new();
    for (i, img) in images.iter().enumerate() {
        for j in 0..=k {
            let mut col: SparseVec<(Sentence, u32)> = BTreeMap::new();
            for (s, c) in img.iter() {
                for (g, x) in c.coeffs() {
                    if g + j <= k {
                        col.insert((s.clone(), g + j), x.clone());
                    }
                }
            }
            ech.push(col);
            unknowns.push((i, j));
        }
    }
    let target: SparseVec<(Sentence, u32)> = BTreeMap::from([((Sentence::unit(), n), Rational::one())]);
    let Some(sol) = ech.solve(&target) else {
        return Ok(GridTorsion::NotFound { bounds: t.clone() });
    };
    let mut x = Expression::zero();
    for ((i, j), c) in unknowns.iter().zip(sol) {
        if !c.is_zero() {
            x.add_term(basis[*i].clone(), H::monomial(c, *j));
        }
    }
    if !check_grid_witness(a, &x, n, m, k) {
        return Err(Error::Internal("grid torsion witness failed its re-check".into()));
    }
    Ok(GridTorsion::Witness {
        n,
        m,
        k,
        x,
        degenerate: false,
    })
}

/// `w_1 ⊙ ... ⊙ w_i ↦ hbar^{shift - i} w_1 ... w_i`, i.e. `hbar^{shift-1} C(x)`.
fn connect(x: &Expression<H>, shift: usize) -> Result<Expression<H>> {
    let mut out = Expression::zero();
    for (s, c) in x.iter() {
        let i = s.len();
        if i == 0 || i > shift {
            return Err(Error::Precondition(format!("sentence of length {i} outside the filtration")));
        }
        let letters = s.words().iter().flat_map(|w| w.letters().iter().copied()).collect();
        if let Some((sign, w)) = Word::from_letters(letters) {
            out.add_signed(Sentence::single(w), sign, c.shift((shift - i) as u32));
        }
    }
    Ok(out)
}

/// `hbar^m C_{m+1}(x)` for a witness of `(n, m)_k` torsion; the result is a
/// witness of `(n + m, 0)_k` and is re-verified. `k = None` means exact.
pub fn cm_transform(a: &IBLAlgebra, x: &Expression<H>, n: u32, m: usize, k: Option<u32>) -> Result<Expression<H>> {
    let hat = a.hat();
    let proj = |e: &Expression<H>| match k {
        Some(k) => pi_k(e, k),
        None => e.clone(),
    };
    let expect = |n: u32| match k {
        Some(k) if n > k => Expression::zero(),
        _ => hbar_unit(n),
    };
    let residue = proj(&hat.apply(x)).minus(&expect(n));
    if x.max_sentence_len() > m + 1 || !residue.is_zero() {
        return Err(Error::Precondition(format!(
            "not a (n, m) torsion witness; residue {}",
            a.space.format_expression(&residue)
        )));
    }
    let y = proj(&connect(x, m + 1)?);
    if proj(&hat.apply(&y)) != expect(n + m as u32) {
        return Err(Error::Internal("transformed witness failed its re-check".into()));
    }
    Ok(y)
}

/// `C_m ∘ p-hat = p-hat ∘ C_m` on sentences of at most `m` words, checked
/// for `hbar^{m-1} C_m`, which has no negative powers there.
pub fn verify_cm_chain(a: &IBLAlgebra, m: usize, t: &Truncation) -> Report<H> {
    let hat = a.hat();
    let mut spec = BasisSpec::filtration(t, m);
    spec.min_word_len = 1;
    let basis = basis::sentences(&a.space, &spec);
    check_on_basis(&basis, |s| {
        let x = Expression::term(s.clone(), H::one());
        let left = connect(&hat.apply(&x), m);
        let right = connect(&x, m).map(|c| hat.apply(&c));
        match (left, right) {
            (Ok(l), Ok(r)) => (l.minus(&r), false),
            _ => (Expression::zero(), true),
        }
    })
}

/// One grid cell with the witnesses implied by it.
#[derive(Clone, Debug)]
pub struct GridCell {
    pub n: u32,
    pub m: usize,
    pub k: u32,
    pub result: GridTorsion,
    /// `π_{k-1}` of the witness solves the `(n, m)_{k-1}` system.
    pub projection: Option<bool>,
    /// The `cm_transform` image re-verifies as `(n + m, 0)_k`.
    pub transform: Option<bool>,
}

/// All cells `n <= G`, `m < K`, `k <= G` with the implications checked on
/// every non-degenerate witness.
pub fn grid_properties_check(a: &IBLAlgebra, t: &Truncation) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    let mut found: BTreeMap<(u32, usize, u32), bool> = BTreeMap::new();
    for k in 0..=t.genus_cap {
        for n in 0..=t.genus_cap {
            for m in 0..t.max_sentence_len {
                let result = grid_torsion(a, n, m, k, t)?;
                found.insert((n, m, k), result.found());
                let (mut projection, mut transform) = (None, None);
                if let GridTorsion::Witness {
                    x, degenerate: false, ..
                } = &result
                {
                    if k > 0 {
                        let xp = pi_k(x, k - 1);
                        let ok = check_grid_witness(a, &xp, n, m, k - 1);
                        let again = found.get(&(n, m, k - 1)).copied().unwrap_or(false);
                        projection = Some(ok && again);
                    }
                    transform = Some(match cm_transform(a, x, n, m, Some(k)) {
                        Ok(y) => check_grid_witness(a, &y, n + m as u32, 0, k),
                        Err(_) => false,
                    });
                }
                cells.push(GridCell {
                    n,
                    m,
                    k,
                    result,
                    projection,
                    transform,
                });
            }
        }
    }
    Ok(cells)
}

/// Whether every implication recorded in a grid holds, including
/// `(n, m)_k ⇒ (n + 1, m)_k` and `(n, m + 1)_k` where those cells exist.
pub fn grid_consistent(cells: &[GridCell]) -> bool {
    let found: BTreeMap<(u32, usize, u32), bool> = cells.iter().map(|c| ((c.n, c.m, c.k), c.result.found())).collect();
    cells.iter().all(|c| {
        let implied_ok = !c.result.found()
            || [(c.n + 1, c.m, c.k), (c.n, c.m + 1, c.k)]
                .iter()
                .all(|key| found.get(key).copied().unwrap_or(true));
        implied_ok && c.projection != Some(false) && c.transform != Some(false)
    })
}

/// `difference` specialized for two assemblies, used by tests comparing
/// the sentence-level map on single words with [`sv_apply`].
pub fn compare_on_words(a: &IBLAlgebra, t: &Truncation) -> Report<H> {
    let hat = a.hat();
    let words = basis::words(&a.space, 1, t.max_word_len, Some(&t.weight_cutoff));
    let basis: Vec<Sentence> = words.into_iter().map(Sentence::single).collect();
    let sv = SvHat(a);
    check_on_basis(&basis, |s| difference(&hat, &sv, Parity::Even, s))
}

struct SvHat<'a>(&'a IBLAlgebra);

impl HatMap<H> for SvHat<'_> {
    fn parity(&self) -> Parity {
        Parity::Odd
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &H, out: &mut Expression<H>) -> bool {
        if s.len() != 1 {
            return true;
        }
        let mut m = BTreeMap::new();
        sv_apply(self.0, &s.words()[0], coeff, &mut m);
        for (w, c) in m {
            out.add_term(Sentence::single(w), c);
        }
        false
    }
}
