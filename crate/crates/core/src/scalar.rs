//! Coefficient rings: exact rationals, truncated Novikov series and
//! genus-graded power series in `hbar`.
//!
//! Truncated arithmetic follows precision semantics: combining two values
//! with different cutoffs yields the smaller cutoff, so `zero()` and `one()`
//! (cutoff at infinity) stay neutral. Callers that want a mismatch to be an
//! error use [`NovikovElem::try_mul`] or [`crate::space::Expression::try_combine`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Operations shared by every coefficient type.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;

    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }

    fn scaled(&self, r: &Rational) -> Self {
        self.times(&Self::from_rational(r))
    }

    /// `hbar^n` when the ring carries a genus grading. Only `n == 0` is
    /// representable in ungraded rings.
    fn hbar_power(n: u32) -> Option<Self> {
        if n == 0 {
            Some(Self::one())
        } else {
            None
        }
    }

    /// Whether two values live in the same truncation context.
    fn same_context(&self, _other: &Self) -> bool {
        true
    }
}

/// Exact rational number, serialized as the string `"p/q"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(n: i64, d: i64) -> Self {
        Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn factorial(n: usize) -> Self {
        let mut acc = BigInt::one();
        for i in 2..=n {
            acc *= BigInt::from(i);
        }
        Rational(BigRational::from_integer(acc))
    }

    /// Largest `g > 0` with every nonzero input an integer multiple of `g`.
    pub fn gcd_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        let mut any = false;
        for v in values {
            if v.is_zero() {
                continue;
            }
            any = true;
            num = num.gcd(v.numer());
            den = den.lcm(v.denom());
        }
        any.then(|| Rational(BigRational::new(num, den)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(n, d)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl std::ops::$tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl std::ops::$tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

rational_binop!(Add, add, +);
rational_binop!(Sub, sub, -);
rational_binop!(Mul, mul, *);
rational_binop!(Div, div, /);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::ops::AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
}

/// Which exponents a Novikov element may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NovikovMode {
    /// Nonnegative exponents only.
    Ring,
    /// Any rational exponent.
    Field,
}

/// Finite sum `sum c_i T^{t_i}`, truncated below an optional cutoff.
///
/// Terms are kept sorted by exponent with nonzero coefficients; exponents at
/// or above the cutoff are dropped. A `None` cutoff means no truncation.
#[derive(Clone)]
pub struct NovikovElem {
    terms: Vec<(Rational, Rational)>,
    cutoff: Option<Rational>,
    mode: NovikovMode,
}

fn min_cutoff(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(x.min(y).clone()),
    }
}

fn join_mode(a: NovikovMode, b: NovikovMode) -> NovikovMode {
    if a == NovikovMode::Field || b == NovikovMode::Field {
        NovikovMode::Field
    } else {
        NovikovMode::Ring
    }
}

impl NovikovElem {
    /// Builds an element from `(coefficient, exponent)` pairs.
    pub fn new(
        terms: impl IntoIterator<Item = (Rational, Rational)>,
        cutoff: Option<Rational>,
        mode: NovikovMode,
    ) -> Result<Self> {
        let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (c, t) in terms {
            if mode == NovikovMode::Ring && t.is_negative() {
                return Err(Error::Config(format!(
                    "negative exponent {t} in Novikov ring mode"
                )));
            }
            *map.entry(t).or_insert_with(Rational::zero) += &c;
        }
        Ok(Self::from_map(map, cutoff, mode))
    }

    fn from_map(
        map: BTreeMap<Rational, Rational>,
        cutoff: Option<Rational>,
        mode: NovikovMode,
    ) -> Self {
        let terms = map
            .into_iter()
            .filter(|(t, c)| !c.is_zero() && cutoff.as_ref().map_or(true, |w| t < w))
            .map(|(t, c)| (c, t))
            .collect();
        NovikovElem {
            terms,
            cutoff,
            mode,
        }
    }

    pub fn monomial(c: Rational, t: Rational) -> Self {
        NovikovElem::new([(c, t)], None, NovikovMode::Ring).expect("nonnegative monomial")
    }

    /// `c T^t` in field mode, allowing any exponent.
    pub fn field_monomial(c: Rational, t: Rational) -> Self {
        NovikovElem::new([(c, t)], None, NovikovMode::Field).expect("field monomial")
    }

    pub fn scalar(c: Rational) -> Self {
        Self::monomial(c, Rational::zero())
    }

    /// `(coefficient, exponent)` pairs in increasing exponent order.
    pub fn terms(&self) -> &[(Rational, Rational)] {
        &self.terms
    }

    pub fn cutoff(&self) -> Option<&Rational> {
        self.cutoff.as_ref()
    }

    pub fn mode(&self) -> NovikovMode {
        self.mode
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<&Rational> {
        self.terms.first().map(|(_, t)| t)
    }

    pub fn coefficient_at(&self, t: &Rational) -> Rational {
        self.terms
            .iter()
            .find(|(_, e)| e == t)
            .map(|(c, _)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Drops exponents at or above `w`, keeping the smaller of the two cutoffs.
    pub fn truncate(&self, w: Option<&Rational>) -> Self {
        let cutoff = min_cutoff(&self.cutoff, &w.cloned());
        let map = self.terms.iter().map(|(c, t)| (t.clone(), c.clone())).collect();
        Self::from_map(map, cutoff, self.mode)
    }

    pub fn with_mode(mut self, mode: NovikovMode) -> Result<Self> {
        if mode == NovikovMode::Ring && self.terms.iter().any(|(_, t)| t.is_negative()) {
            return Err(Error::Config("negative exponent in Novikov ring mode".into()));
        }
        self.mode = mode;
        Ok(self)
    }

    /// Multiplies by `T^t`.
    pub fn shift(&self, t: &Rational) -> Self {
        let map = self.terms.iter().map(|(c, e)| (e + t, c.clone())).collect();
        let mode = if t.is_negative() { NovikovMode::Field } else { self.mode };
        Self::from_map(map, self.cutoff.clone(), mode)
    }

    /// Product that refuses to mix truncation contexts.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cutoff != rhs.cutoff {
            return Err(Error::Config(format!(
                "Novikov cutoff mismatch: {:?} vs {:?}",
                self.cutoff, rhs.cutoff
            )));
        }
        if self.mode != rhs.mode {
            return Err(Error::Config("Novikov ring/field mode mismatch".into()));
        }
        Ok(self.times(rhs))
    }
}

impl fmt::Debug for NovikovElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, t)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}T^{t:?}")?;
        }
        Ok(())
    }
}

impl PartialEq for NovikovElem {
    fn eq(&self, other: &Self) -> bool {
        let w = min_cutoff(&self.cutoff, &other.cutoff);
        self.truncate(w.as_ref()).terms == other.truncate(w.as_ref()).terms
    }
}

impl Scalar for NovikovElem {
    fn zero() -> Self {
        NovikovElem {
            terms: Vec::new(),
            cutoff: None,
            mode: NovikovMode::Ring,
        }
    }

    fn one() -> Self {
        Self::scalar(Rational::one())
    }

    fn from_rational(r: &Rational) -> Self {
        Self::scalar(r.clone())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn plus(&self, rhs: &Self) -> Self {
        let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (c, t) in self.terms.iter().chain(&rhs.terms) {
            *map.entry(t.clone()).or_insert_with(Rational::zero) += c;
        }
        Self::from_map(
            map,
            min_cutoff(&self.cutoff, &rhs.cutoff),
            join_mode(self.mode, rhs.mode),
        )
    }

    fn times(&self, rhs: &Self) -> Self {
        let cutoff = min_cutoff(&self.cutoff, &rhs.cutoff);
        let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (a, s) in &self.terms {
            for (b, t) in &rhs.terms {
                let e = s + t;
                if cutoff.as_ref().map_or(false, |w| &e >= w) {
                    continue;
                }
                *map.entry(e).or_insert_with(Rational::zero) += &(a * b);
            }
        }
        Self::from_map(map, cutoff, join_mode(self.mode, rhs.mode))
    }

    fn negated(&self) -> Self {
        NovikovElem {
            terms: self.terms.iter().map(|(c, t)| (-c, t.clone())).collect(),
            cutoff: self.cutoff.clone(),
            mode: self.mode,
        }
    }

    fn same_context(&self, other: &Self) -> bool {
        self.cutoff == other.cutoff && self.mode == other.mode
    }
}

/// Power series `sum_g c_g hbar^g`, optionally truncated above a genus cap.
#[derive(Clone)]
pub struct HbarSeries<C> {
    coeffs: BTreeMap<u32, C>,
    cap: Option<u32>,
}

fn min_cap(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl<C: Scalar> HbarSeries<C> {
    pub fn monomial(c: C, genus: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(genus, c);
        }
        HbarSeries { coeffs, cap: None }
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (u32, C)>, cap: Option<u32>) -> Self {
        let mut map: BTreeMap<u32, C> = BTreeMap::new();
        for (g, c) in coeffs {
            if cap.map_or(false, |k| g > k) {
                continue;
            }
            let e = map.entry(g).or_insert_with(C::zero);
            *e = e.plus(&c);
        }
        map.retain(|_, c| !c.is_zero());
        HbarSeries { coeffs: map, cap }
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, C> {
        &self.coeffs
    }

    pub fn coefficient(&self, genus: u32) -> C {
        self.coeffs.get(&genus).cloned().unwrap_or_else(C::zero)
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    /// Lowest power of `hbar` present.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn truncate(&self, cap: Option<u32>) -> Self {
        let cap = min_cap(self.cap, cap);
        Self::from_coeffs(self.coeffs.iter().map(|(g, c)| (*g, c.clone())), cap)
    }

    /// Multiplies by `hbar^n`.
    pub fn shift(&self, n: u32) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|(g, c)| (g + n, c.clone())), self.cap)
    }
}

impl<C: Scalar> fmt::Debug for HbarSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})h^{g}")?;
        }
        Ok(())
    }
}

impl<C: Scalar> PartialEq for HbarSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        let cap = min_cap(self.cap, other.cap);
        let a = self.truncate(cap);
        let b = other.truncate(cap);
        a.coeffs.len() == b.coeffs.len()
            && a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| x.0 == y.0 && x.1 == y.1)
    }
}

impl<C: Scalar> Scalar for HbarSeries<C> {
    fn zero() -> Self {
        HbarSeries {
            coeffs: BTreeMap::new(),
            cap: None,
        }
    }

    fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    fn from_rational(r: &Rational) -> Self {
        Self::monomial(C::from_rational(r), 0)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn plus(&self, rhs: &Self) -> Self {
        Self::from_coeffs(
            self.coeffs.iter().chain(&rhs.coeffs).map(|(g, c)| (*g, c.clone())),
            min_cap(self.cap, rhs.cap),
        )
    }

    fn times(&self, rhs: &Self) -> Self {
        let cap = min_cap(self.cap, rhs.cap);
        let mut out = Vec::new();
        for (g, a) in &self.coeffs {
            for (h, b) in &rhs.coeffs {
                if cap.map_or(true, |k| g + h <= k) {
                    out.push((g + h, a.times(b)));
                }
            }
        }
        Self::from_coeffs(out, cap)
    }

    fn negated(&self) -> Self {
        HbarSeries {
            coeffs: self.coeffs.iter().map(|(g, c)| (*g, c.negated())).collect(),
            cap: self.cap,
        }
    }

    fn hbar_power(n: u32) -> Option<Self> {
        Some(Self::monomial(C::one(), n))
    }

    fn same_context(&self, other: &Self) -> bool {
        self.cap == other.cap
    }
}
