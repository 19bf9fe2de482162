//! Assembly of hat-maps on `EV` from their components.
//!
//! Every hat-map is a sum over ways of gluing one level of components below
//! a forest of words. A gluing is a list of applications; each application
//! consumes some letters, feeds them (as a canonical word) to a component and
//! produces a word. Connected pieces of the glued graph become the output
//! words; untouched letters pass through.
//!
//! Signs come from one rule. Linearize the input sentence to its letter
//! sequence, move the consumed letters to the front grouped by application,
//! apply the operators from the front (an operator passes the inputs of the
//! applications before it), then regroup the outputs and leftovers by
//! connected piece and canonicalize. Every reordering is paid with its
//! Koszul sign.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{koszul_sign, Letter, Parity, Sentence, Sign, Space, Word};
use crate::space::Expression;

/// Linear combination of words.
pub type WordPoly<C> = BTreeMap<Word, C>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Structure,
    Morphism,
    Pointed,
    Augmentation,
    ScalarShift,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Structure => "structure",
            ComponentKind::Morphism => "morphism",
            ComponentKind::Pointed => "pointed",
            ComponentKind::Augmentation => "augmentation",
            ComponentKind::ScalarShift => "scalar-shift",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "structure" => ComponentKind::Structure,
            "morphism" => ComponentKind::Morphism,
            "pointed" => ComponentKind::Pointed,
            "augmentation" => ComponentKind::Augmentation,
            "scalar-shift" => ComponentKind::ScalarShift,
            other => return Err(Error::Parse(format!("unknown component kind {other:?}"))),
        })
    }
}

/// One component family `S^k V -> S V'`, stored by its support.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentMap<C> {
    pub kind: ComponentKind,
    pub arity: usize,
    pub genus: u32,
    pub shift: Parity,
    /// Constraint tags of a pointed component; empty for everything else.
    pub tags: Vec<u32>,
    pub support: BTreeMap<Word, WordPoly<C>>,
}

impl<C: Scalar> ComponentMap<C> {
    pub fn new(kind: ComponentKind, arity: usize, genus: u32, shift: Parity) -> Self {
        ComponentMap {
            kind,
            arity,
            genus,
            shift,
            tags: Vec::new(),
            support: BTreeMap::new(),
        }
    }

    pub fn with_tags(mut self, mut tags: Vec<u32>) -> Self {
        tags.sort_unstable();
        tags.dedup();
        self.tags = tags;
        self
    }

    /// Adds `c * out` to the image of `input`.
    pub fn add(&mut self, input: Word, out: Word, c: C) {
        let poly = self.support.entry(input.clone()).or_default();
        add_to_poly(poly, out, c);
        if poly.is_empty() {
            self.support.remove(&input);
        }
    }

    /// Checks arity, parity shift and letter ranges.
    pub fn validate(&self, source: &Space, target: &Space) -> Result<()> {
        if self.arity == 0 {
            return Err(Error::Parse("component arity must be at least 1".into()));
        }
        for (input, poly) in &self.support {
            if input.len() != self.arity {
                return Err(Error::Parse(format!(
                    "input word of length {} in a component of arity {}",
                    input.len(),
                    self.arity
                )));
            }
            check_letters(input, source)?;
            for out in poly.keys() {
                check_letters(out, target)?;
                if out.parity() != input.parity() + self.shift {
                    return Err(Error::Parse(format!(
                        "output {} of {} violates the parity shift {}",
                        target.format_word(out),
                        source.format_word(input),
                        self.shift.as_u8()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_letters(w: &Word, space: &Space) -> Result<()> {
    for l in w.letters() {
        let ok = (l.index() as usize) < space.len()
            && space.generators()[l.index() as usize].parity == l.parity();
        if !ok {
            return Err(Error::Parse("letter outside its generator table".into()));
        }
    }
    Ok(())
}

pub(crate) fn add_to_poly<C: Scalar>(poly: &mut WordPoly<C>, w: Word, c: C) {
    if c.is_zero() {
        return;
    }
    let e = poly.entry(w.clone()).or_insert_with(C::zero);
    *e = e.plus(&c);
    if e.is_zero() {
        poly.remove(&w);
    }
}

/// All components of one hat-map merged into a lookup table keyed by the
/// canonical input word.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<C> {
    parity: Parity,
    table: BTreeMap<Word, WordPoly<C>>,
    arities: Vec<usize>,
    known_arity: Option<usize>,
}

impl<C: Scalar> Operator<C> {
    pub fn new(parity: Parity) -> Self {
        Operator {
            parity,
            table: BTreeMap::new(),
            arities: Vec::new(),
            known_arity: None,
        }
    }

    /// Merges genus-0 components that share one parity shift.
    pub fn from_components(parity: Parity, components: &[ComponentMap<C>]) -> Result<Self> {
        Self::from_components_with(parity, components, |c, genus| {
            if genus == 0 {
                Ok(c.clone())
            } else {
                Err(Error::Config("genus > 0 component in a genus-0 structure".into()))
            }
        })
    }

    pub fn from_components_with<D: Scalar>(
        parity: Parity,
        components: &[ComponentMap<D>],
        lift: impl Fn(&D, u32) -> Result<C>,
    ) -> Result<Self> {
        let mut op = Operator::new(parity);
        for comp in components {
            if comp.shift != parity {
                return Err(Error::Config(format!(
                    "component of arity {} has shift {} but the map has parity {}",
                    comp.arity,
                    comp.shift.as_u8(),
                    parity.as_u8()
                )));
            }
            for (input, poly) in &comp.support {
                for (out, c) in poly {
                    op.add(input, out.clone(), lift(c, comp.genus)?);
                }
            }
        }
        Ok(op)
    }

    pub fn add(&mut self, input: &Word, out: Word, c: C) {
        let poly = self.table.entry(input.clone()).or_default();
        add_to_poly(poly, out, c);
        if poly.is_empty() {
            self.table.remove(input);
            self.refresh_arities();
        } else if let Err(at) = self.arities.binary_search(&input.len()) {
            self.arities.insert(at, input.len());
        }
    }

    fn refresh_arities(&mut self) {
        self.arities = self.table.keys().map(Word::len).unique().sorted().collect();
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn get(&self, input: &Word) -> Option<&WordPoly<C>> {
        self.table.get(input)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &WordPoly<C>)> {
        self.table.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn max_arity(&self) -> usize {
        self.arities.last().copied().unwrap_or(0)
    }

    /// Marks entries of arity above `a` as unknown rather than zero.
    pub fn with_known_arity(mut self, a: usize) -> Self {
        self.known_arity = Some(a);
        self
    }

    pub fn known_arity(&self) -> Option<usize> {
        self.known_arity
    }

    pub fn plus(&self, other: &Operator<C>) -> Self {
        let mut out = self.clone();
        for (input, poly) in &other.table {
            for (w, c) in poly {
                out.add(input, w.clone(), c.clone());
            }
        }
        out.known_arity = match (self.known_arity, other.known_arity) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        out
    }

    pub fn scaled(&self, k: &C) -> Self {
        let mut out = Operator::new(self.parity);
        out.known_arity = self.known_arity;
        for (input, poly) in &self.table {
            for (w, c) in poly {
                out.add(input, w.clone(), c.times(k));
            }
        }
        out
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Operator<D> {
        let mut out = Operator::new(self.parity);
        out.known_arity = self.known_arity;
        for (input, poly) in &self.table {
            for (w, c) in poly {
                out.add(input, w.clone(), f(c));
            }
        }
        out
    }

    /// Splits back into components, one per arity.
    pub fn to_components(&self, kind: ComponentKind) -> Vec<ComponentMap<C>> {
        let mut by_arity: BTreeMap<usize, ComponentMap<C>> = BTreeMap::new();
        for (input, poly) in &self.table {
            let comp = by_arity
                .entry(input.len())
                .or_insert_with(|| ComponentMap::new(kind, input.len(), 0, self.parity));
            comp.support.insert(input.clone(), poly.clone());
        }
        by_arity.into_values().collect()
    }
}

/// A map `EV -> EV'` given on sentences and extended linearly.
pub trait HatMap<C: Scalar>: Sync {
    fn parity(&self) -> Parity;

    /// Adds `coeff * map(s)` to `out`. Returns `true` when the result may
    /// depend on components that are not known.
    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool;

    fn apply_checked(&self, x: &Expression<C>) -> (Expression<C>, bool) {
        let mut out = Expression::zero();
        let mut escaped = false;
        for (s, c) in x.iter() {
            escaped |= self.apply_sentence_into(s, c, &mut out);
        }
        (out, escaped)
    }

    fn apply(&self, x: &Expression<C>) -> Expression<C> {
        self.apply_checked(x).0
    }

    fn apply_sentence(&self, s: &Sentence) -> Expression<C> {
        let mut out = Expression::zero();
        self.apply_sentence_into(s, &C::one(), &mut out);
        out
    }
}

/// One application inside a gluing.
#[derive(Clone, Debug)]
pub(crate) struct App<'a, C> {
    pub op_parity: Parity,
    /// `(word, letter)` positions, in linear order.
    pub positions: Vec<(usize, usize)>,
    pub key_sign: Sign,
    pub outputs: &'a WordPoly<C>,
    /// Extra powers of `hbar` created by this application.
    pub genus: u32,
}

struct Layout {
    offsets: Vec<usize>,
    word_of: Vec<usize>,
    odd: Vec<bool>,
    letters: Vec<Letter>,
}

impl Layout {
    fn new(raw: &[Vec<Letter>]) -> Self {
        let mut offsets = Vec::with_capacity(raw.len());
        let mut word_of = Vec::new();
        let mut odd = Vec::new();
        let mut letters = Vec::new();
        for (w, word) in raw.iter().enumerate() {
            offsets.push(letters.len());
            for l in word {
                word_of.push(w);
                odd.push(l.is_odd());
                letters.push(*l);
            }
        }
        Layout {
            offsets,
            word_of,
            odd,
            letters,
        }
    }

    fn lin(&self, p: (usize, usize)) -> usize {
        self.offsets[p.0] + p.1
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

fn components_of<C>(n_words: usize, apps: &[App<'_, C>]) -> UnionFind {
    let mut uf = UnionFind::new(n_words);
    for app in apps {
        let w0 = app.positions[0].0;
        for p in &app.positions[1..] {
            uf.union(w0, p.0);
        }
    }
    uf
}

/// Evaluates one gluing and adds `coeff` times its output to `out`.
pub(crate) fn evaluate<C: Scalar>(
    raw: &[Vec<Letter>],
    apps: &[App<'_, C>],
    coeff: &C,
    out: &mut Expression<C>,
) {
    let layout = Layout::new(raw);
    let n = layout.letters.len();
    let mut consumed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for app in apps {
        for &p in &app.positions {
            let l = layout.lin(p);
            consumed[l] = true;
            order.push(l);
        }
    }
    let rest: Vec<usize> = (0..n).filter(|l| !consumed[*l]).collect();
    order.extend(&rest);
    let mut sign = koszul_sign(&order, &layout.odd);

    let mut before = Parity::Even;
    let mut input_parity = Vec::with_capacity(apps.len());
    for app in apps {
        let xp = Parity::from_odd(
            app.positions.iter().filter(|p| layout.odd[layout.lin(**p)]).count() % 2 == 1,
        );
        sign = sign * Sign::koszul(app.op_parity, before) * app.key_sign;
        before = before + xp;
        input_parity.push(xp);
    }

    // Connected pieces, ordered by their smallest word index. The union-find
    // keeps the smallest index as root.
    let mut uf = components_of(raw.len(), apps);
    let roots: Vec<usize> = (0..raw.len()).map(|w| uf.find(w)).collect();
    let pieces: Vec<usize> = roots.iter().copied().unique().sorted().collect();
    let piece_of_root: BTreeMap<usize, usize> =
        pieces.iter().enumerate().map(|(i, r)| (*r, i)).collect();

    // Items after the operators act: outputs of the applications, then the
    // untouched letters in linear order.
    let a = apps.len();
    let mut item_odd = Vec::with_capacity(a + rest.len());
    let mut item_piece = Vec::with_capacity(a + rest.len());
    for (j, app) in apps.iter().enumerate() {
        item_odd.push((app.op_parity + input_parity[j]).is_odd());
        item_piece.push(piece_of_root[&roots[app.positions[0].0]]);
    }
    for &l in &rest {
        item_odd.push(layout.odd[l]);
        item_piece.push(piece_of_root[&roots[layout.word_of[l]]]);
    }
    let mut target: Vec<usize> = (0..item_odd.len()).collect();
    target.sort_by_key(|i| item_piece[*i]);
    sign = sign * koszul_sign(&target, &item_odd);

    let genus: u32 = apps.iter().map(|app| app.genus).sum();
    let mut base = sign.apply(coeff.clone());
    if genus > 0 {
        let h = C::hbar_power(genus).expect("genus increment needs an hbar-graded ring");
        base = base.times(&h);
    }

    let choices: Vec<Vec<(&Word, &C)>> = apps.iter().map(|app| app.outputs.iter().collect()).collect();
    for_each_pick(&choices, |pick| {
        let mut c = base.clone();
        for (_, k) in pick {
            c = c.times(k);
        }
        if c.is_zero() {
            return;
        }
        let mut piece_letters: Vec<Vec<Letter>> = vec![Vec::new(); pieces.len()];
        for &i in &target {
            let piece = item_piece[i];
            if i < a {
                piece_letters[piece].extend_from_slice(pick[i].0.letters());
            } else {
                piece_letters[piece].push(layout.letters[rest[i - a]]);
            }
        }
        let mut s = Sign::Plus;
        let mut words = Vec::with_capacity(pieces.len());
        let mut dead = false;
        for letters in piece_letters {
            match Word::from_letters(letters) {
                Some((ws, w)) => {
                    s = s * ws;
                    words.push(w);
                }
                None => {
                    dead = true;
                    break;
                }
            }
        }
        if dead {
            return;
        }
        if let Some((ss, sentence)) = Sentence::from_words(words) {
            out.add_signed(sentence, s * ss, c);
        }
    });
}

/// Calls `f` with every pick of one element per list (once for no lists).
fn for_each_pick<T>(lists: &[Vec<T>], mut f: impl FnMut(&[&T])) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    loop {
        let pick: Vec<&T> = idx.iter().zip(lists).map(|(i, l)| &l[*i]).collect();
        f(&pick);
        let mut j = lists.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < lists[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn key_for(raw: &[Vec<Letter>], positions: &[(usize, usize)]) -> Option<(Sign, Word)> {
    Word::from_letters(positions.iter().map(|&(w, i)| raw[w][i]).collect())
}

/// Gluings of one level realizing every tag exactly once. Each group is a
/// component family carrying a set of tags; each application takes at most
/// one letter per word and the glued graph stays a forest. Untagged maps use
/// a single group with one tag.
pub(crate) fn for_each_level_gluing<'a, C: Scalar>(
    raw: &[Vec<Letter>],
    groups: &'a [(Vec<u32>, Operator<C>)],
    tags: &[u32],
    f: &mut dyn FnMut(&[App<'a, C>]),
) -> bool {
    let mut used = vec![Vec::new(); raw.len()];
    for (w, word) in raw.iter().enumerate() {
        used[w] = vec![false; word.len()];
    }
    let mut apps = Vec::new();
    let mut escaped = false;
    level_step(raw, groups, tags.to_vec(), &mut used, &mut apps, &mut escaped, f);
    escaped
}

fn level_step<'a, C: Scalar>(
    raw: &[Vec<Letter>],
    groups: &'a [(Vec<u32>, Operator<C>)],
    remaining: Vec<u32>,
    used: &mut Vec<Vec<bool>>,
    apps: &mut Vec<App<'a, C>>,
    escaped: &mut bool,
    f: &mut dyn FnMut(&[App<'a, C>]),
) {
    let Some(&t) = remaining.first() else {
        f(apps);
        return;
    };
    let candidates: Vec<usize> = (0..raw.len())
        .filter(|&w| used[w].iter().any(|u| !u))
        .collect();
    let mut uf = components_of(raw.len(), apps);
    let roots: Vec<usize> = (0..raw.len()).map(|w| uf.find(w)).collect();
    for (gtags, op) in groups {
        if !gtags.contains(&t) || !gtags.iter().all(|g| remaining.contains(g)) {
            continue;
        }
        if op.known_arity.map_or(false, |k| candidates.len() > k) {
            *escaped = true;
        }
        let rest: Vec<u32> = remaining.iter().copied().filter(|g| !gtags.contains(g)).collect();
        for &k in &op.arities {
            if k > candidates.len() {
                break;
            }
            for combo in candidates.iter().copied().combinations(k) {
                if !combo.iter().map(|w| roots[*w]).all_unique() {
                    continue;
                }
                let options: Vec<Vec<(usize, usize)>> = combo
                    .iter()
                    .map(|&w| (0..raw[w].len()).filter(|&i| !used[w][i]).map(|i| (w, i)).collect())
                    .collect();
                for positions in options.into_iter().multi_cartesian_product() {
                    let Some((key_sign, key)) = key_for(raw, &positions) else {
                        continue;
                    };
                    let Some(outputs) = op.get(&key) else {
                        continue;
                    };
                    for &(w, i) in &positions {
                        used[w][i] = true;
                    }
                    apps.push(App {
                        op_parity: op.parity,
                        positions: positions.clone(),
                        key_sign,
                        outputs,
                        genus: 0,
                    });
                    level_step(raw, groups, rest.clone(), used, apps, escaped, f);
                    apps.pop();
                    for &(w, i) in &positions {
                        used[w][i] = false;
                    }
                }
            }
        }
    }
}

/// Gluings of a single component to any set of letters, several per word
/// allowed; each extra letter taken from an already touched word adds one
/// to the genus.
pub(crate) fn for_each_ibl_gluing<'a, C: Scalar>(
    raw: &[Vec<Letter>],
    op: &'a Operator<C>,
    f: &mut dyn FnMut(&[App<'a, C>]),
) -> bool {
    let positions: Vec<(usize, usize)> = raw
        .iter()
        .enumerate()
        .flat_map(|(w, word)| (0..word.len()).map(move |i| (w, i)))
        .collect();
    let escaped = op.known_arity.map_or(false, |k| positions.len() > k);
    for &k in &op.arities {
        if k > positions.len() {
            break;
        }
        for chosen in positions.iter().copied().combinations(k) {
            let Some((key_sign, key)) = key_for(raw, &chosen) else {
                continue;
            };
            let Some(outputs) = op.get(&key) else {
                continue;
            };
            let touched = chosen.iter().map(|p| p.0).unique().count();
            let app = App {
                op_parity: op.parity,
                positions: chosen,
                key_sign,
                outputs,
                genus: (k - touched) as u32,
            };
            f(std::slice::from_ref(&app));
        }
    }
    escaped
}

/// Gluings that consume every letter, each application taking at most one
/// letter per word, with no cycles. With `pointed`, exactly one application
/// uses it.
pub(crate) fn for_each_forest_gluing<'a, C: Scalar>(
    raw: &[Vec<Letter>],
    op: &'a Operator<C>,
    pointed: Option<&'a Operator<C>>,
    f: &mut dyn FnMut(&[App<'a, C>]),
) -> bool {
    let mut assigned: Vec<Vec<bool>> = raw.iter().map(|w| vec![false; w.len()]).collect();
    let mut apps = Vec::new();
    let mut escaped = false;
    forest_step(raw, op, pointed, false, &mut assigned, &mut apps, &mut escaped, f);
    escaped
}

#[allow(clippy::too_many_arguments)]
fn forest_step<'a, C: Scalar>(
    raw: &[Vec<Letter>],
    op: &'a Operator<C>,
    pointed: Option<&'a Operator<C>>,
    pointed_used: bool,
    assigned: &mut Vec<Vec<bool>>,
    apps: &mut Vec<App<'a, C>>,
    escaped: &mut bool,
    f: &mut dyn FnMut(&[App<'a, C>]),
) {
    let first = (0..raw.len())
        .flat_map(|w| (0..raw[w].len()).map(move |i| (w, i)))
        .find(|&(w, i)| !assigned[w][i]);
    let Some((w0, i0)) = first else {
        if pointed.is_none() || pointed_used {
            f(apps);
        }
        return;
    };
    let mut uf = components_of(raw.len(), apps);
    let roots: Vec<usize> = (0..raw.len()).map(|w| uf.find(w)).collect();
    let candidates: Vec<usize> = (0..raw.len())
        .filter(|&w| w != w0 && roots[w] != roots[w0] && assigned[w].iter().any(|a| !a))
        .collect();
    let mut choices: Vec<(&'a Operator<C>, bool)> = vec![(op, false)];
    if let (Some(p), false) = (pointed, pointed_used) {
        choices.push((p, true));
    }
    for (o, is_pointed) in choices {
        if o.known_arity.map_or(false, |k| candidates.len() + 1 > k) {
            *escaped = true;
        }
        for &k in &o.arities {
            if k > candidates.len() + 1 {
                break;
            }
            for combo in candidates.iter().copied().combinations(k - 1) {
                if !combo.iter().map(|w| roots[*w]).all_unique() {
                    continue;
                }
                let mut options: Vec<Vec<(usize, usize)>> = vec![vec![(w0, i0)]];
                for &w in &combo {
                    options.push((0..raw[w].len()).filter(|&i| !assigned[w][i]).map(|i| (w, i)).collect());
                }
                for mut positions in options.into_iter().multi_cartesian_product() {
                    positions.sort();
                    let Some((key_sign, key)) = key_for(raw, &positions) else {
                        continue;
                    };
                    let Some(outputs) = o.get(&key) else {
                        continue;
                    };
                    for &(w, i) in &positions {
                        assigned[w][i] = true;
                    }
                    apps.push(App {
                        op_parity: o.parity,
                        positions: positions.clone(),
                        key_sign,
                        outputs,
                        genus: 0,
                    });
                    forest_step(
                        raw,
                        op,
                        pointed,
                        pointed_used || is_pointed,
                        assigned,
                        apps,
                        escaped,
                        f,
                    );
                    apps.pop();
                    for &(w, i) in &positions {
                        assigned[w][i] = false;
                    }
                }
            }
        }
    }
}

/// `p-hat`: one component glued to distinct words, one letter each.
pub struct HatP<C> {
    groups: Vec<(Vec<u32>, Operator<C>)>,
}

impl<C: Scalar> HatP<C> {
    pub fn new(op: &Operator<C>) -> Self {
        HatP {
            groups: vec![(vec![0], op.clone())],
        }
    }

    pub fn apply_raw(&self, raw: &[Vec<Letter>], coeff: &C, out: &mut Expression<C>) -> bool {
        for_each_level_gluing(raw, &self.groups, &[0], &mut |apps| evaluate(raw, apps, coeff, out))
    }
}

impl<C: Scalar> HatMap<C> for HatP<C> {
    fn parity(&self) -> Parity {
        self.groups[0].1.parity
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        self.apply_raw(&s.to_raw(), coeff, out)
    }
}

/// Multi-pointed hat-map: one level realizing each of the given tags once,
/// either by one multi-tag component or by several disjoint ones.
pub struct HatMulti<C> {
    groups: Vec<(Vec<u32>, Operator<C>)>,
    tags: Vec<u32>,
    parity: Parity,
}

impl<C: Scalar> HatMulti<C> {
    pub fn new(groups: Vec<(Vec<u32>, Operator<C>)>, tags: Vec<u32>) -> Self {
        let parity = groups.iter().fold(Parity::Even, |acc, (_, op)| acc + op.parity);
        HatMulti {
            groups,
            tags,
            parity,
        }
    }

    pub fn apply_raw(&self, raw: &[Vec<Letter>], coeff: &C, out: &mut Expression<C>) -> bool {
        for_each_level_gluing(raw, &self.groups, &self.tags, &mut |apps| {
            evaluate(raw, apps, coeff, out)
        })
    }
}

impl<C: Scalar> HatMap<C> for HatMulti<C> {
    fn parity(&self) -> Parity {
        self.parity
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        self.apply_raw(&s.to_raw(), coeff, out)
    }
}

/// IBL `p-hat`: one component glued to any letters, genus from cycles.
pub struct HatIbl<'a, C> {
    op: &'a Operator<C>,
}

impl<'a, C: Scalar> HatIbl<'a, C> {
    pub fn new(op: &'a Operator<C>) -> Self {
        HatIbl { op }
    }

    pub fn apply_raw(&self, raw: &[Vec<Letter>], coeff: &C, out: &mut Expression<C>) -> bool {
        for_each_ibl_gluing(raw, self.op, &mut |apps| evaluate(raw, apps, coeff, out))
    }
}

impl<C: Scalar> HatMap<C> for HatIbl<'_, C> {
    fn parity(&self) -> Parity {
        self.op.parity
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        self.apply_raw(&s.to_raw(), coeff, out)
    }
}

/// `phi-hat`: all letters consumed by a forest of applications. With a
/// pointed family, exactly one application uses it.
pub struct HatPhi<'a, C> {
    op: &'a Operator<C>,
    pointed: Option<&'a Operator<C>>,
}

impl<'a, C: Scalar> HatPhi<'a, C> {
    pub fn new(op: &'a Operator<C>) -> Self {
        HatPhi { op, pointed: None }
    }

    pub fn pointed(op: &'a Operator<C>, pointed: &'a Operator<C>) -> Self {
        HatPhi {
            op,
            pointed: Some(pointed),
        }
    }

    pub fn apply_raw(&self, raw: &[Vec<Letter>], coeff: &C, out: &mut Expression<C>) -> bool {
        for_each_forest_gluing(raw, self.op, self.pointed, &mut |apps| {
            evaluate(raw, apps, coeff, out)
        })
    }
}

impl<C: Scalar> HatMap<C> for HatPhi<'_, C> {
    fn parity(&self) -> Parity {
        self.pointed.map_or(Parity::Even, |p| p.parity)
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        self.apply_raw(&s.to_raw(), coeff, out)
    }
}

/// `b` after `a`.
pub struct Then<'x, C> {
    pub first: &'x dyn HatMap<C>,
    pub second: &'x dyn HatMap<C>,
}

impl<C: Scalar> HatMap<C> for Then<'_, C> {
    fn parity(&self) -> Parity {
        self.first.parity() + self.second.parity()
    }

    fn apply_sentence_into(&self, s: &Sentence, coeff: &C, out: &mut Expression<C>) -> bool {
        let mut mid = Expression::zero();
        let mut escaped = self.first.apply_sentence_into(s, coeff, &mut mid);
        for (t, c) in mid.iter() {
            escaped |= self.second.apply_sentence_into(t, c, out);
        }
        escaped
    }
}

/// One candidate gluing of a component to a sentence, for tracing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    /// Words receiving the component, in sentence order.
    pub words: Vec<usize>,
    /// Consumed `(word, letter)` positions.
    pub letters: Vec<(usize, usize)>,
    /// Koszul sign of bringing the consumed letters to the front and sorting
    /// them into the component's input word.
    pub sign: Sign,
    /// Canonical input word, `None` if it vanishes.
    pub input: Option<Word>,
    pub genus_increment: u32,
}

/// Every way to glue an arity-`k` component to `s`, whether or not the
/// component is supported on the resulting input. With `multi_letter`,
/// several letters of one word may be taken (the IBL rule).
pub fn enumerate_gluings(s: &Sentence, k: usize, multi_letter: bool) -> Vec<Gluing> {
    let raw = s.to_raw();
    let layout = Layout::new(&raw);
    let positions: Vec<(usize, usize)> = raw
        .iter()
        .enumerate()
        .flat_map(|(w, word)| (0..word.len()).map(move |i| (w, i)))
        .collect();
    let picks: Vec<Vec<(usize, usize)>> = if multi_letter {
        positions.into_iter().combinations(k).collect()
    } else {
        let nonempty: Vec<usize> = (0..raw.len()).filter(|&w| !raw[w].is_empty()).collect();
        nonempty
            .into_iter()
            .combinations(k)
            .flat_map(|combo| {
                combo
                    .into_iter()
                    .map(|w| (0..raw[w].len()).map(move |i| (w, i)))
                    .multi_cartesian_product()
            })
            .collect()
    };
    picks
        .into_iter()
        .map(|chosen| {
            let lin: Vec<usize> = chosen.iter().map(|p| layout.lin(*p)).collect();
            let mut order = lin.clone();
            order.extend((0..layout.letters.len()).filter(|l| !lin.contains(l)));
            let reorder = koszul_sign(&order, &layout.odd);
            let key = key_for(&raw, &chosen);
            let words: Vec<usize> = chosen.iter().map(|p| p.0).unique().collect();
            Gluing {
                genus_increment: (chosen.len() - words.len()) as u32,
                words,
                sign: key.as_ref().map_or(reorder, |(s, _)| reorder * *s),
                input: key.map(|(_, w)| w),
                letters: chosen,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::space::Generator;

    fn q(n: i64) -> Rational {
        Rational::int(n)
    }

    #[test]
    fn twenty_one_gluings() {
        let gens = (1..=8).map(|i| Generator::new(format!("v{i}"), Parity::Odd)).collect();
        let space = Space::new(gens).unwrap();
        let w = |ids: &[&str]| space.word_nonzero(ids).unwrap().1;
        let (_, s) = Sentence::from_words(vec![
            w(&["v1", "v2", "v3"]),
            w(&["v4", "v5", "v6"]),
            w(&["v7", "v8"]),
        ])
        .unwrap();
        assert_eq!(enumerate_gluings(&s, 2, false).len(), 21);
    }

    #[test]
    fn single_component_on_two_words() {
        // x odd, y even, p(x y) = 1
        let space = Space::new(vec![Generator::new("x", Parity::Odd), Generator::new("y", Parity::Even)])
            .unwrap();
        let (_, xy) = space.word_nonzero(&["x", "y"]).unwrap();
        let mut op = Operator::new(Parity::Odd);
        op.add(&xy, Word::empty(), q(1));
        let hat = HatP::new(&op);
        let x = space.word_nonzero(&["x"]).unwrap().1;
        let y = space.word_nonzero(&["y"]).unwrap().1;
        let (_, s) = Sentence::from_words(vec![x, y]).unwrap();
        let out = hat.apply_sentence(&s);
        assert_eq!(out, Expression::unit());
    }
}
