//! Universal polynomials over the rationals.
//!
//! Every Witt structure map is given by integer (or p-integral) polynomials in
//! the variables `X_d`, `Y_d`. They are solved here over `Q` from their ghost
//! equations, one level at a time, checked for integrality, and cached for the
//! life of the process.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::profiles::{divisors, is_power_of, is_prime, prime_power, Profile};
use crate::rings::CommRing;
use crate::witt;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    X,
    Y,
}

/// A variable `X_d` or `Y_d`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UVar {
    pub family: Family,
    pub index: u64,
}

impl UVar {
    pub fn x(index: u64) -> Self {
        UVar {
            family: Family::X,
            index,
        }
    }

    pub fn y(index: u64) -> Self {
        UVar {
            family: Family::Y,
            index,
        }
    }
}

impl fmt::Display for UVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.family {
            Family::X => 'X',
            Family::Y => 'Y',
        };
        write!(f, "{c}{}", self.index)
    }
}

/// A monomial as `(variable, exponent)` pairs sorted by variable, exponents
/// positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(UVar, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: UVar, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (UVar, u32)>) -> Self {
        let mut v: Vec<(UVar, u32)> = Vec::new();
        let mut sorted: Vec<(UVar, u32)> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        sorted.sort();
        for (var, e) in sorted {
            match v.last_mut() {
                Some(last) if last.0 == var => last.1 += e,
                _ => v.push((var, e)),
            }
        }
        Monomial(v)
    }

    pub fn pairs(&self) -> &[(UVar, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    /// Weighted degree with `X_d`, `Y_d` of weight `d`.
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|(v, e)| v.index * *e as u64).sum()
    }

    pub fn exponent(&self, v: UVar) -> u32 {
        self.0
            .binary_search_by(|p| p.0.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    fn mul(&self, rhs: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Graded lexicographic order: higher total degree first, then the
    /// monomial with the larger exponent at the first differing variable in
    /// the order `X1 < X2 < ... < Y1 < Y2 < ...`.
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let mut i = 0;
            loop {
                match (a.get(i), b.get(i)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(x), Some(y)) => {
                        if x.0 != y.0 {
                            // whoever has the smaller variable has the larger exponent there
                            return if x.0 < y.0 { Ordering::Less } else { Ordering::Greater };
                        }
                        if x.1 != y.1 {
                            return y.1.cmp(&x.1);
                        }
                    }
                }
                i += 1;
            }
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A sparse polynomial with exact rational coefficients in the variables
/// `X_d`, `Y_d`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UPoly {
    terms: HashMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = UPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: UVar) -> Self {
        let mut p = UPoly::zero();
        p.add_term(Monomial::var(v, 1), BigRational::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = UPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Terms in canonical (graded lexicographic) order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.grlex_cmp(b.0));
        v
    }

    pub fn variables(&self) -> BTreeSet<UVar> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|p| p.0))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn scale(&self, c: &BigRational) -> UPoly {
        if c.is_zero() {
            return UPoly::zero();
        }
        UPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn add_assign_scaled(&mut self, rhs: &UPoly, c: &BigRational) {
        for (m, a) in &rhs.terms {
            self.add_term(m.clone(), a * c);
        }
    }

    fn mul_generic(&self, rhs: &UPoly) -> UPoly {
        let mut out = UPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Multiplication with exponent vectors packed into a `u128` (8 bits per
    /// variable, at most 16 variables) when that is possible.
    fn mul_packed(&self, rhs: &UPoly) -> Option<UPoly> {
        let vars: Vec<UVar> = self.variables().union(&rhs.variables()).copied().collect();
        if vars.len() > 16 {
            return None;
        }
        let max_exp = |p: &UPoly, v: UVar| p.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0);
        if vars.iter().any(|&v| max_exp(self, v) + max_exp(rhs, v) > 255) {
            return None;
        }
        let pack = |m: &Monomial| -> u128 {
            let mut key = 0u128;
            for (v, e) in &m.0 {
                let slot = vars.binary_search(v).unwrap();
                key |= (*e as u128) << (8 * slot);
            }
            key
        };
        let unpack = |key: u128| -> Monomial {
            Monomial(
                vars.iter()
                    .enumerate()
                    .filter_map(|(slot, v)| {
                        let e = ((key >> (8 * slot)) & 0xff) as u32;
                        (e > 0).then_some((*v, e))
                    })
                    .collect(),
            )
        };
        let a: Vec<(u128, &BigRational)> = self.terms.iter().map(|(m, c)| (pack(m), c)).collect();
        let b: Vec<(u128, &BigRational)> = rhs.terms.iter().map(|(m, c)| (pack(m), c)).collect();
        let terms = if self.is_integral() && rhs.is_integral() {
            let mut acc: HashMap<u128, BigInt> = HashMap::with_capacity(a.len().max(b.len()) * 4);
            for (ka, ca) in &a {
                for (kb, cb) in &b {
                    let prod = ca.numer() * cb.numer();
                    *acc.entry(ka + kb).or_default() += prod;
                }
            }
            acc.into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (unpack(k), BigRational::from_integer(c)))
                .collect()
        } else {
            let mut acc: HashMap<u128, BigRational> = HashMap::new();
            for (ka, ca) in &a {
                for (kb, cb) in &b {
                    *acc.entry(ka + kb).or_insert_with(BigRational::zero) += *ca * *cb;
                }
            }
            acc.into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (unpack(k), c))
                .collect()
        };
        Some(UPoly { terms })
    }

    /// Substitutes a polynomial for each variable.
    pub fn substitute(&self, f: impl Fn(UVar) -> UPoly) -> UPoly {
        self.eval(&UPoly::zero(), f)
            .expect("rational coefficients always embed in Q[X, Y]")
    }

    /// Evaluates at values in any commutative ring. Fails only when a
    /// non-integral coefficient has no image there.
    pub fn eval<R: CommRing>(&self, like: &R, value: impl Fn(UVar) -> R) -> Result<R> {
        // powers[v] is None when v evaluates to zero
        let mut powers: HashMap<UVar, Option<Vec<R>>> = HashMap::new();
        let mut acc = like.zero_like();
        'terms: for (m, c) in &self.terms {
            for (v, _) in &m.0 {
                let entry = powers.entry(*v).or_insert_with(|| {
                    let x = value(*v);
                    (!x.is_zero()).then(|| vec![x.one_like(), x])
                });
                if entry.is_none() {
                    continue 'terms;
                }
            }
            let mut term = if c.is_integer() {
                like.int_like(c.numer())
            } else {
                like.rational_like(c)?
            };
            for (v, e) in &m.0 {
                let pw = powers.get_mut(v).and_then(|p| p.as_mut()).expect("nonzero variable");
                while pw.len() <= *e as usize {
                    let next = pw.last().unwrap().mul(&pw[1]);
                    pw.push(next);
                }
                term = term.mul(&pw[*e as usize]);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Reduces coefficients modulo a prime; `None` if some coefficient is not
    /// `p`-integral.
    pub fn reduce_mod(&self, p: u64) -> Option<UPoly> {
        let pp = BigInt::from(p);
        let mut out = UPoly::zero();
        for (m, c) in &self.terms {
            let d = c.denom();
            if (d % &pp).is_zero() {
                return None;
            }
            let inv = d.modpow(&(&pp - 2u32), &pp);
            let r = ((c.numer() * inv) % &pp + &pp) % &pp;
            out.add_term(m.clone(), BigRational::from_integer(r));
        }
        Some(out)
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.sorted_terms()
                .into_iter()
                .map(|(m, c)| {
                    let mono: serde_json::Map<String, Json> =
                        m.0.iter().map(|(v, e)| (v.to_string(), json!(e))).collect();
                    json!({"coeff": c.to_string(), "monomial": mono})
                })
                .collect(),
        )
    }
}

impl CommRing for UPoly {
    fn zero_like(&self) -> Self {
        UPoly::zero()
    }

    fn one_like(&self) -> Self {
        UPoly::constant(BigRational::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, rhs: &Self) -> Self {
        let (mut big, small) = if self.terms.len() >= rhs.terms.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        big.add_assign_scaled(small, &BigRational::one());
        big
    }

    fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &rat(-1));
        out
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return UPoly::zero();
        }
        self.mul_packed(rhs).unwrap_or_else(|| self.mul_generic(rhs))
    }

    fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    fn int_like(&self, n: &BigInt) -> Self {
        UPoly::constant(BigRational::from_integer(n.clone()))
    }

    fn rational_like(&self, q: &BigRational) -> Result<Self> {
        Ok(UPoly::constant(q.clone()))
    }

    fn div_int(&self, n: &BigInt) -> Result<Self> {
        Ok(self.scale(&BigRational::new(BigInt::one(), n.clone())))
    }
}

impl fmt::Display for UPoly {
    /// Canonical text form, e.g. `X1^6 + 2*X2^3 + 3*X3^2 + 6*X6`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.0.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly({self})")
    }
}

/// The nth Witt polynomial `sum_{d | n} d * V_d^(n/d)` in the given family.
pub fn witt_polynomial_in(family: Family, n: u64) -> UPoly {
    assert!(n >= 1);
    UPoly::from_terms(divisors(n).into_iter().map(|d| {
        (
            Monomial::var(UVar { family, index: d }, (n / d) as u32),
            rat(d as i64),
        )
    }))
}

/// `w_n = sum_{d | n} d * X_d^(n/d)`.
pub fn witt_polynomial(n: u64) -> UPoly {
    witt_polynomial_in(Family::X, n)
}

/// The p-typical part of `w_n`: only the terms with `d` a power of `p`.
fn p_typical_ghost(p: u64, n: u64) -> UPoly {
    UPoly::from_terms(
        divisors(n)
            .into_iter()
            .filter(|&d| is_power_of(d, p))
            .map(|d| (Monomial::var(UVar::x(d), (n / d) as u32), rat(d as i64))),
    )
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum StructuralKind {
    Sum,
    Product,
    Neg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Locality {
    Global,
    AtPrime(u64),
}

/// Whether every coefficient is an integer (`Global`) or has denominator prime
/// to `p` (`AtPrime(p)`).
pub fn assert_integral(poly: &UPoly, locality: Locality) -> bool {
    first_bad_coeff(poly, locality).is_none()
}

fn first_bad_coeff(poly: &UPoly, locality: Locality) -> Option<BigRational> {
    poly.terms
        .values()
        .find(|c| match locality {
            Locality::Global => !c.is_integer(),
            Locality::AtPrime(p) => (c.denom() % BigInt::from(p)).is_zero(),
        })
        .cloned()
}

// ---- cache and limits ----

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Structural(StructuralKind, u64),
    Frobenius(u64, u64),
    Epsilon(u64, u64),
    Delta(u64, u64),
}

fn cache() -> &'static RwLock<HashMap<Key, Arc<UPoly>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<UPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

static MAX_INDEX: AtomicU64 = AtomicU64::new(24);
static MAX_PRIME_POWER: AtomicU64 = AtomicU64::new(243);

/// Largest index with at least two distinct prime factors for which universal
/// polynomials are computed. Default 24.
pub fn set_max_index(n: u64) {
    MAX_INDEX.store(n, AtomicOrdering::Relaxed);
}

pub fn max_index() -> u64 {
    MAX_INDEX.load(AtomicOrdering::Relaxed)
}

/// Largest prime-power index allowed. Default 243. p-typical levels only
/// involve the variables at powers of p, so their polynomials stay small
/// much longer.
pub fn set_max_prime_power(n: u64) {
    MAX_PRIME_POWER.store(n, AtomicOrdering::Relaxed);
}

fn check_cap(n: u64) -> Result<()> {
    let cap = if n == 1 || prime_power(n).is_some() {
        MAX_PRIME_POWER.load(AtomicOrdering::Relaxed)
    } else {
        max_index()
    };
    if n > cap {
        Err(Error::CapExceeded { index: n, cap })
    } else {
        Ok(())
    }
}

fn lookup(key: Key) -> Option<Arc<UPoly>> {
    cache().read().unwrap().get(&key).cloned()
}

fn store(key: Key, poly: UPoly) -> Arc<UPoly> {
    let poly = Arc::new(poly);
    cache().write().unwrap().insert(key, poly.clone());
    poly
}

/// Number of cached universal polynomials (for diagnostics).
pub fn cache_len() -> usize {
    cache().read().unwrap().len()
}

/// Solves `sum_{d | n} d * Q_d^(n/d) = target` for `Q_n` given the lower `Q_d`.
fn solve_level(n: u64, target: UPoly, lower: impl Fn(u64) -> Result<Arc<UPoly>>) -> Result<UPoly> {
    let mut acc = target;
    for d in divisors(n) {
        if d == n {
            break;
        }
        let q = lower(d)?;
        acc = acc.sub(&q.pow(n / d).scale(&rat(d as i64)));
    }
    Ok(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(n))))
}

fn require_integral(poly: UPoly, name: impl FnOnce() -> String) -> Result<UPoly> {
    match first_bad_coeff(&poly, Locality::Global) {
        None => Ok(poly),
        Some(c) => Err(Error::IntegralityViolation {
            poly: name(),
            coeff: c.to_string(),
        }),
    }
}

/// The unique polynomial solving the level-`n` ghost equation of the given
/// ring law: `S_n` (sum), `Z_n` (product) or `I_n` (negation).
pub fn structural_poly(kind: StructuralKind, n: u64) -> Result<Arc<UPoly>> {
    if n == 0 {
        return Err(Error::EmptyProfile(0));
    }
    let key = Key::Structural(kind, n);
    if let Some(p) = lookup(key) {
        return Ok(p);
    }
    check_cap(n)?;
    let wx = witt_polynomial_in(Family::X, n);
    let target = match kind {
        StructuralKind::Sum => wx.add(&witt_polynomial_in(Family::Y, n)),
        StructuralKind::Product => wx.mul(&witt_polynomial_in(Family::Y, n)),
        StructuralKind::Neg => wx.neg(),
    };
    let poly = solve_level(n, target, |d| structural_poly(kind, d))?;
    let poly = require_integral(poly, || format!("{kind:?}_{n}"))?;
    Ok(store(key, poly))
}

/// Component `m` of the Frobenius `F_n`, determined by
/// `w_m(F_n(X)) = w_{nm}(X)`.
pub fn frobenius_poly(n: u64, m: u64) -> Result<Arc<UPoly>> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyProfile(0));
    }
    let key = Key::Frobenius(n, m);
    if let Some(p) = lookup(key) {
        return Ok(p);
    }
    check_cap(n * m)?;
    let poly = solve_level(m, witt_polynomial(n * m), |d| frobenius_poly(n, d))?;
    let poly = require_integral(poly, || format!("F_{n} component {m}"))?;
    Ok(store(key, poly))
}

/// Components `1..=big_n` of the idempotent `eps_p`, the additive map that
/// keeps the ghost components at powers of `p` and kills all others. Every
/// coefficient is checked to be `p`-integral.
pub fn epsilon_polys(p: u64, big_n: u64) -> Result<Vec<Arc<UPoly>>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    (1..=big_n).map(|n| epsilon_poly(p, n)).collect()
}

pub fn epsilon_poly(p: u64, n: u64) -> Result<Arc<UPoly>> {
    let key = Key::Epsilon(p, n);
    if let Some(q) = lookup(key) {
        return Ok(q);
    }
    check_cap(n)?;
    let target = if is_power_of(n, p) {
        p_typical_ghost(p, n)
    } else {
        UPoly::zero()
    };
    let poly = solve_level(n, target, |d| epsilon_poly(p, d))?;
    if let Some(c) = first_bad_coeff(&poly, Locality::AtPrime(p)) {
        return Err(Error::PIntegralityViolation {
            poly: format!("eps_{p} component {n}"),
            p,
            coeff: c.to_string(),
        });
    }
    Ok(store(key, poly))
}

/// Component `(n, m)` of the diagonal `W -> W(W)`: the `m`-th Witt component
/// of the `n`-th outer component. Requires `n <= a` and `m <= b`; the result
/// does not otherwise depend on `a` and `b`.
pub fn delta_poly(a: u64, b: u64, n: u64, m: u64) -> Result<Arc<UPoly>> {
    if n == 0 || m == 0 || n > a || m > b {
        return Err(Error::ProfileMismatch {
            expected: format!("1 <= n <= {a}, 1 <= m <= {b}"),
            actual: format!("n = {n}, m = {m}"),
        });
    }
    delta_component(n, m)
}

fn delta_component(n: u64, m: u64) -> Result<Arc<UPoly>> {
    let key = Key::Delta(n, m);
    if let Some(q) = lookup(key) {
        return Ok(q);
    }
    check_cap(n * m)?;
    let inner = Profile::closure(&[m])?;
    let vector = delta_outer_component(n, &inner)?;
    let pos = inner.position(m).expect("m is in its own divisor closure");
    let poly = require_integral(vector[pos].clone(), || format!("Delta component ({n}, {m})"))?;
    Ok(store(key, poly))
}

/// Solves the outer ghost equation `sum_{d | n} d * D_d^(n/d) = F_n(X)` in the
/// Witt ring over `Q[X]` with inner profile `inner`, returning `D_n`.
fn delta_outer_component(n: u64, inner: &Profile) -> Result<Vec<UPoly>> {
    let lower_vec = |d: u64| -> Result<Vec<UPoly>> {
        inner
            .indices()
            .iter()
            .map(|&j| delta_component(d, j).map(|p| (*p).clone()))
            .collect()
    };
    let mut acc: Vec<UPoly> = inner
        .indices()
        .iter()
        .map(|&j| frobenius_poly(n, j).map(|p| (*p).clone()))
        .collect::<Result<_>>()?;
    for d in divisors(n) {
        if d == n {
            break;
        }
        let dd = lower_vec(d)?;
        let power = witt::pow_components(inner, &dd, n / d)?;
        let scaled = witt::int_multiple_components(inner, &power, d as i64)?;
        let neg = witt::neg_components(inner, &scaled)?;
        acc = witt::add_components(inner, &acc, &neg)?;
    }
    // division by n in W(Q[X]) through the ghost side
    let ghost = witt::ghost_components(inner, &acc);
    let scaled: Vec<UPoly> = ghost
        .iter()
        .map(|g| g.scale(&BigRational::new(BigInt::one(), BigInt::from(n))))
        .collect();
    witt::unghost_components(inner, &scaled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u64) -> UPoly {
        UPoly::var(UVar::x(i))
    }

    fn y(i: u64) -> UPoly {
        UPoly::var(UVar::y(i))
    }

    fn c(n: i64) -> UPoly {
        UPoly::constant(rat(n))
    }

    #[test]
    fn witt_polynomials() {
        assert_eq!(witt_polynomial(1), x(1));
        let w6 = x(1).pow(6).add(&c(2).mul(&x(2).pow(3))).add(&c(3).mul(&x(3).pow(2))).add(&c(6).mul(&x(6)));
        assert_eq!(witt_polynomial(6), w6);
        assert_eq!(witt_polynomial(6).to_string(), "X1^6 + 2*X2^3 + 3*X3^2 + 6*X6");
        let w4 = x(1).pow(4).add(&c(2).mul(&x(2).pow(2))).add(&c(4).mul(&x(4)));
        assert_eq!(witt_polynomial(4), w4);
    }

    #[test]
    fn low_level_structural_polys() {
        use StructuralKind::*;
        assert_eq!(*structural_poly(Sum, 1).unwrap(), x(1).add(&y(1)));
        assert_eq!(*structural_poly(Sum, 2).unwrap(), x(2).add(&y(2)).sub(&x(1).mul(&y(1))));
        let z2 = x(1).pow(2).mul(&y(2)).add(&x(2).mul(&y(1).pow(2))).add(&c(2).mul(&x(2)).mul(&y(2)));
        assert_eq!(*structural_poly(Product, 2).unwrap(), z2);
        assert_eq!(*structural_poly(Neg, 1).unwrap(), x(1).neg());
        assert_eq!(*structural_poly(Neg, 2).unwrap(), x(1).pow(2).neg().sub(&x(2)));
    }

    #[test]
    fn sum_p_matches_binomial_formula() {
        // S_p = X_p + Y_p - sum_{0<k<p} binom(p,k)/p X_1^k Y_1^(p-k)
        for p in [2u64, 3, 5, 7] {
            let mut expect = x(p).add(&y(p));
            let mut binom = BigInt::one();
            for k in 1..p {
                binom = binom * BigInt::from(p - k + 1) / BigInt::from(k);
                let coeff = BigRational::new(binom.clone(), BigInt::from(p));
                expect = expect.sub(&x(1).pow(k).mul(&y(1).pow(p - k)).scale(&coeff));
            }
            assert_eq!(*structural_poly(StructuralKind::Sum, p).unwrap(), expect, "p = {p}");
        }
    }

    #[test]
    fn ghost_identities_hold_symbolically() {
        for n in 1..=12u64 {
            for kind in [StructuralKind::Sum, StructuralKind::Product, StructuralKind::Neg] {
                let comps: HashMap<u64, Arc<UPoly>> =
                    divisors(n).into_iter().map(|d| (d, structural_poly(kind, d).unwrap())).collect();
                let lhs = witt_polynomial(n).substitute(|v| (*comps[&v.index]).clone());
                let wx = witt_polynomial_in(Family::X, n);
                let wy = witt_polynomial_in(Family::Y, n);
                let rhs = match kind {
                    StructuralKind::Sum => wx.add(&wy),
                    StructuralKind::Product => wx.mul(&wy),
                    StructuralKind::Neg => wx.neg(),
                };
                assert_eq!(lhs, rhs, "{kind:?} at n = {n}");
            }
        }
    }

    #[test]
    fn structural_support_divides_n() {
        for n in 1..=12u64 {
            for kind in [StructuralKind::Sum, StructuralKind::Product, StructuralKind::Neg] {
                for v in structural_poly(kind, n).unwrap().variables() {
                    assert_eq!(n % v.index, 0);
                }
            }
        }
    }

    #[test]
    fn frobenius_polys() {
        assert_eq!(*frobenius_poly(2, 1).unwrap(), x(1).pow(2).add(&c(2).mul(&x(2))));
        for m in 1..=6 {
            assert_eq!(*frobenius_poly(1, m).unwrap(), x(m));
        }
        for p in [2u64, 3] {
            for m in 1..=4 {
                let reduced = frobenius_poly(p, m).unwrap().reduce_mod(p).unwrap();
                assert_eq!(reduced, x(m).pow(p), "p = {p}, m = {m}");
            }
        }
    }

    #[test]
    fn frobenius_composition() {
        for n in 1..=4u64 {
            for k in 1..=4u64 {
                for m in 1..=12 / (n * k) {
                    // F_n(F_k(X))_m: substitute components of F_k into F_n
                    let outer = frobenius_poly(n, m).unwrap();
                    let composed = outer.substitute(|v| (*frobenius_poly(k, v.index).unwrap()).clone());
                    assert_eq!(composed, *frobenius_poly(n * k, m).unwrap(), "n={n} k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn epsilon_components() {
        let eps = epsilon_polys(2, 4).unwrap();
        assert_eq!(*eps[0], x(1));
        assert_eq!(*eps[1], x(2));
        assert_eq!(*eps[3], x(4));
        // ghost at 3 must vanish: y_1^3 + 3 y_3 = 0
        let third = BigRational::new(BigInt::from(-1), BigInt::from(3));
        assert_eq!(eps[2].coeff(&Monomial::var(UVar::x(1), 3)), third);
        assert!(eps[2].variables().iter().all(|v| is_power_of(v.index, 2)));
        for p in [2u64, 3, 5] {
            for poly in epsilon_polys(p, 16).unwrap() {
                assert!(assert_integral(&poly, Locality::AtPrime(p)));
            }
        }
    }

    #[test]
    fn integrality_checks() {
        assert!(assert_integral(&x(1).add(&y(1)), Locality::Global));
        let two_thirds = x(1).scale(&BigRational::new(2.into(), 3.into()));
        assert!(!assert_integral(&two_thirds, Locality::Global));
        assert!(assert_integral(&two_thirds, Locality::AtPrime(2)));
        let half = x(1).scale(&BigRational::new(1.into(), 2.into()));
        assert!(!assert_integral(&half, Locality::AtPrime(2)));
    }

    #[test]
    fn delta_components() {
        for m in 1..=3 {
            assert_eq!(*delta_poly(3, 3, 1, m).unwrap(), x(m));
        }
        // inner ghost of the outer component n is the Frobenius vector F_m
        for n in 1..=3u64 {
            for m in 1..=3u64 {
                let inner = Profile::closure(&[m]).unwrap();
                let comps: Vec<UPoly> = inner
                    .indices()
                    .iter()
                    .map(|&j| (*delta_poly(3, 3, n, j).unwrap()).clone())
                    .collect();
                let g = witt::ghost_components(&inner, &comps);
                assert_eq!(g.last().unwrap(), &*frobenius_poly(m, n).unwrap(), "n={n} m={m}");
            }
        }
        // Teichmuller inputs: outer components beyond the first vanish
        let d22 = delta_poly(2, 2, 2, 1).unwrap();
        assert!(d22.eval(&UPoly::zero(), |v| if v.index == 1 { x(1) } else { UPoly::zero() }).unwrap().is_zero());
        assert!(delta_poly(2, 2, 3, 1).is_err());
    }

    #[test]
    fn cache_is_transparent() {
        let a = structural_poly(StructuralKind::Product, 6).unwrap();
        let b = structural_poly(StructuralKind::Product, 6).unwrap();
        assert_eq!(a, b);
        assert!(cache_len() > 0);
    }

    #[test]
    fn canonical_text_and_json() {
        let s2 = structural_poly(StructuralKind::Sum, 2).unwrap();
        assert_eq!(s2.to_string(), "-X1*Y1 + X2 + Y2");
        let j = s2.to_json();
        assert_eq!(j[0]["coeff"], "-1");
        assert_eq!(j[0]["monomial"]["X1"], 1);
        let e = epsilon_poly(2, 3).unwrap();
        assert_eq!(e.to_string(), "-1/3*X1^3");
        assert_eq!(UPoly::zero().to_string(), "0");
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            structural_poly(StructuralKind::Sum, 30),
            Err(Error::CapExceeded { index: 30, cap: 24 })
        ));
        assert!(structural_poly(StructuralKind::Sum, 27).is_ok());
    }
}
