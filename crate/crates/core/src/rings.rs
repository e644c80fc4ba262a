//! Coefficient rings.
//!
//! A [`RingDescriptor`] names one of a fixed set of exact commutative rings and
//! carries all arithmetic for it. A [`RingElement`] is a value tagged with its
//! descriptor. Everything built on top (Witt vectors, series, universal
//! polynomial evaluation) goes through the [`CommRing`] trait, which both
//! `RingElement` and the universal polynomial type implement.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::profiles::{gcd, is_power_of, is_prime};

/// The arithmetic every coefficient type must provide.
pub trait CommRing: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Image of an integer under the canonical map from `Z`.
    fn int_like(&self, n: &BigInt) -> Self;
    /// Image of a rational, when its denominator is invertible here.
    fn rational_like(&self, q: &BigRational) -> Result<Self>;
    /// The unique `y` with `n*y = self`.
    fn div_int(&self, n: &BigInt) -> Result<Self>;

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn scale_int(&self, n: i64) -> Self {
        self.mul(&self.int_like(&BigInt::from(n)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Integers,
    Rationals,
    LocalizedRationals {
        p: u64,
    },
    IntegersMod {
        m: u64,
    },
    PrimeField {
        p: u64,
    },
    /// `F_p[g]/(modulus)`; `modulus` is monic of degree `k`, low to high.
    FiniteField {
        p: u64,
        k: usize,
        modulus: Vec<u64>,
        /// Irreducibility was checked (only done for `k <= 4`).
        verified: bool,
    },
    PolynomialRing {
        base: RingDescriptor,
        var: String,
    },
}

/// Cheaply clonable handle naming a coefficient ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingDescriptor(Arc<RingKind>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Value {
    Int(BigInt),
    Rat(BigRational),
    Res(u64),
    Gf(Vec<u64>),
    /// Coefficients low to high, no trailing zeros.
    Poly(Vec<Value>),
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

fn big_mod(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

/// Reduces `poly` (low to high) modulo a monic `modulus` over `F_p`.
fn reduce_mod_poly(mut poly: Vec<u64>, modulus: &[u64], p: u64) -> Vec<u64> {
    let k = modulus.len() - 1;
    while poly.len() > k {
        let lead = poly.pop().unwrap();
        if lead != 0 {
            let shift = poly.len() - k;
            for (i, &c) in modulus[..k].iter().enumerate() {
                let t = mul_mod(lead, c, p);
                poly[shift + i] = (poly[shift + i] + p - t) % p;
            }
        }
    }
    poly.resize(k, 0);
    poly
}

fn poly_mod_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // remainder of a by monic-or-not b over F_p
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    let inv_lead = inv_mod(b[db], p).expect("nonzero leading coefficient");
    while r.len() > db {
        let lead = mul_mod(*r.last().unwrap(), inv_lead, p);
        let shift = r.len() - 1 - db;
        for (i, &c) in b.iter().enumerate() {
            let t = mul_mod(lead, c, p);
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        r.pop();
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=k/2`.
fn is_irreducible_fp(modulus: &[u64], p: u64) -> bool {
    let k = modulus.len() - 1;
    for d in 1..=k / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut rest = idx;
            for _ in 0..d {
                cand.push(rest % p);
                rest /= p;
            }
            cand.push(1);
            if poly_mod_fp(modulus, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl RingDescriptor {
    fn wrap(kind: RingKind) -> Self {
        RingDescriptor(Arc::new(kind))
    }

    pub fn integers() -> Self {
        Self::wrap(RingKind::Integers)
    }

    pub fn rationals() -> Self {
        Self::wrap(RingKind::Rationals)
    }

    /// `Z_(p)`: rationals with denominator prime to `p`.
    pub fn localized(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self::wrap(RingKind::LocalizedRationals { p }))
    }

    pub fn integers_mod(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidRing(format!("modulus must be at least 2, got {m}")));
        }
        if m > u32::MAX as u64 {
            return Err(Error::InvalidRing(format!("modulus {m} too large")));
        }
        Ok(Self::wrap(RingKind::IntegersMod { m }))
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > u32::MAX as u64 {
            return Err(Error::InvalidRing(format!("prime {p} too large")));
        }
        Ok(Self::wrap(RingKind::PrimeField { p }))
    }

    /// `F_p[g]/(modulus)`. The modulus is given low to high and must be monic.
    /// Irreducibility is verified for degree at most 4; larger degrees are
    /// accepted with `verified = false`.
    pub fn finite_field(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > u32::MAX as u64 {
            return Err(Error::InvalidRing(format!("prime {p} too large")));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidRing("field modulus must have degree >= 1".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidRing(format!(
                "modulus coefficients must lie in [0, {p})"
            )));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidRing("field modulus must be monic".into()));
        }
        let k = modulus.len() - 1;
        let verified = k <= 4;
        if verified && !is_irreducible_fp(&modulus, p) {
            return Err(Error::InvalidRing(format!(
                "modulus {modulus:?} is reducible over F_{p}"
            )));
        }
        Ok(Self::wrap(RingKind::FiniteField {
            p,
            k,
            modulus,
            verified,
        }))
    }

    pub fn polynomial(base: RingDescriptor, var: impl Into<String>) -> Result<Self> {
        let var = var.into();
        if base.poly_depth() >= 2 {
            return Err(Error::InvalidRing("polynomial nesting depth is limited to 2".into()));
        }
        if var.is_empty() || !var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::InvalidRing(format!("invalid variable name {var:?}")));
        }
        Ok(Self::wrap(RingKind::PolynomialRing { base, var }))
    }

    pub fn kind(&self) -> &RingKind {
        &self.0
    }

    fn poly_depth(&self) -> usize {
        match self.kind() {
            RingKind::PolynomialRing { base, .. } => 1 + base.poly_depth(),
            _ => 0,
        }
    }

    /// 0 for characteristic zero.
    pub fn characteristic(&self) -> u64 {
        match self.kind() {
            RingKind::Integers | RingKind::Rationals | RingKind::LocalizedRationals { .. } => 0,
            RingKind::IntegersMod { m } => *m,
            RingKind::PrimeField { p } | RingKind::FiniteField { p, .. } => *p,
            RingKind::PolynomialRing { base, .. } => base.characteristic(),
        }
    }

    /// Whether every integer prime to `p` is invertible, i.e. this is a
    /// `Z_(p)`-algebra.
    pub fn is_zp_algebra(&self, p: u64) -> bool {
        match self.kind() {
            RingKind::Integers => false,
            RingKind::Rationals => true,
            RingKind::LocalizedRationals { p: q } => *q == p,
            RingKind::IntegersMod { m } => is_power_of(*m, p),
            RingKind::PrimeField { p: q } | RingKind::FiniteField { p: q, .. } => *q == p,
            RingKind::PolynomialRing { base, .. } => base.is_zp_algebra(p),
        }
    }

    /// Whether `n` is a non-zero-divisor, so that division by `n` is unique
    /// whenever it is possible.
    pub fn is_torsion_free_for(&self, n: u64) -> bool {
        let c = self.characteristic();
        c == 0 || gcd(n, c) == 1
    }

    pub fn zero(&self) -> RingElement {
        RingElement::from_value(self, self.v_zero())
    }

    pub fn one(&self) -> RingElement {
        RingElement::from_value(self, self.v_one())
    }

    /// The canonical image of an integer.
    pub fn int_image(&self, n: impl Into<BigInt>) -> RingElement {
        RingElement::from_value(self, self.v_int(&n.into()))
    }

    /// The image of a rational number; fails when its denominator is not
    /// invertible in this ring.
    pub fn rational_image(&self, q: &BigRational) -> Result<RingElement> {
        Ok(RingElement::from_value(self, self.v_rational(q)?))
    }

    /// The generator `u` of a polynomial ring, or `g` of `F_{p^k}`.
    pub fn generator(&self) -> Result<RingElement> {
        match self.kind() {
            RingKind::PolynomialRing { base, .. } => Ok(RingElement::from_value(
                self,
                Value::Poly(vec![base.v_zero(), base.v_one()]),
            )),
            RingKind::FiniteField { p, k, modulus, .. } => {
                let mut v = vec![0; *k];
                let v = if *k == 1 {
                    // g is a root of x + c0
                    v[0] = (p - modulus[0]) % p;
                    v
                } else {
                    v[1] = 1;
                    v
                };
                Ok(RingElement::from_value(self, Value::Gf(v)))
            }
            _ => Err(Error::UnsupportedRing {
                op: "generator",
                ring: self.to_string(),
            }),
        }
    }

    /// Builds a polynomial-ring element from base-ring coefficients, low to
    /// high.
    pub fn poly_from_coeffs(&self, coeffs: &[RingElement]) -> Result<RingElement> {
        let RingKind::PolynomialRing { base, .. } = self.kind() else {
            return Err(Error::UnsupportedRing {
                op: "poly_from_coeffs",
                ring: self.to_string(),
            });
        };
        let mut v = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if &c.ring != base {
                return Err(Error::RingMismatch {
                    left: base.to_string(),
                    right: c.ring.to_string(),
                });
            }
            v.push(c.value.clone());
        }
        Ok(RingElement::from_value(self, base.v_trim(v)))
    }

    /// Builds an `F_{p^k}` element from polynomial-basis residues.
    pub fn gf_from_coeffs(&self, coeffs: &[i64]) -> Result<RingElement> {
        let RingKind::FiniteField { p, modulus, .. } = self.kind() else {
            return Err(Error::UnsupportedRing {
                op: "gf_from_coeffs",
                ring: self.to_string(),
            });
        };
        let raw: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(*p as i64) as u64).collect();
        let v = reduce_mod_poly(raw, modulus, *p);
        Ok(RingElement::from_value(self, Value::Gf(v)))
    }

    /// A small random element for property tests.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        RingElement::from_value(self, self.v_sample(rng))
    }

    fn v_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match self.kind() {
            RingKind::Integers => Value::Int(BigInt::from(rng.gen_range(-6i64..=6))),
            RingKind::Rationals => {
                let n = rng.gen_range(-6i64..=6);
                let d = rng.gen_range(1i64..=5);
                Value::Rat(BigRational::new(n.into(), d.into()))
            }
            RingKind::LocalizedRationals { p } => {
                let n = rng.gen_range(-6i64..=6);
                let mut d = rng.gen_range(1u64..=6);
                while d % p == 0 {
                    d = rng.gen_range(1u64..=6);
                }
                Value::Rat(BigRational::new(n.into(), d.into()))
            }
            RingKind::IntegersMod { m } => Value::Res(rng.gen_range(0..*m)),
            RingKind::PrimeField { p } => Value::Res(rng.gen_range(0..*p)),
            RingKind::FiniteField { p, k, .. } => {
                Value::Gf((0..*k).map(|_| rng.gen_range(0..*p)).collect())
            }
            RingKind::PolynomialRing { base, .. } => {
                let len = rng.gen_range(0..=3);
                let v = (0..len).map(|_| base.v_sample(rng)).collect();
                base.v_trim(v)
            }
        }
    }

    // ---- value-level arithmetic ----

    fn v_zero(&self) -> Value {
        match self.kind() {
            RingKind::Integers => Value::Int(BigInt::zero()),
            RingKind::Rationals | RingKind::LocalizedRationals { .. } => {
                Value::Rat(BigRational::zero())
            }
            RingKind::IntegersMod { .. } | RingKind::PrimeField { .. } => Value::Res(0),
            RingKind::FiniteField { k, .. } => Value::Gf(vec![0; *k]),
            RingKind::PolynomialRing { .. } => Value::Poly(Vec::new()),
        }
    }

    fn v_one(&self) -> Value {
        self.v_int(&BigInt::one())
    }

    fn v_int(&self, n: &BigInt) -> Value {
        match self.kind() {
            RingKind::Integers => Value::Int(n.clone()),
            RingKind::Rationals | RingKind::LocalizedRationals { .. } => {
                Value::Rat(BigRational::from_integer(n.clone()))
            }
            RingKind::IntegersMod { m } => Value::Res(big_mod(n, *m)),
            RingKind::PrimeField { p } => Value::Res(big_mod(n, *p)),
            RingKind::FiniteField { p, k, .. } => {
                let mut v = vec![0; *k];
                v[0] = big_mod(n, *p);
                Value::Gf(v)
            }
            RingKind::PolynomialRing { base, .. } => base.v_trim(vec![base.v_int(n)]),
        }
    }

    fn v_rational(&self, q: &BigRational) -> Result<Value> {
        if q.is_integer() {
            return Ok(self.v_int(q.numer()));
        }
        let not_in = || Error::NotInRing {
            value: q.to_string(),
            ring: self.to_string(),
        };
        match self.kind() {
            RingKind::Integers => Err(not_in()),
            RingKind::Rationals => Ok(Value::Rat(q.clone())),
            RingKind::LocalizedRationals { p } => {
                if (q.denom() % BigInt::from(*p)).is_zero() {
                    Err(not_in())
                } else {
                    Ok(Value::Rat(q.clone()))
                }
            }
            RingKind::IntegersMod { m: modulus } | RingKind::PrimeField { p: modulus } => {
                let d = big_mod(q.denom(), *modulus);
                let inv = inv_mod(d, *modulus).ok_or_else(not_in)?;
                Ok(Value::Res(mul_mod(big_mod(q.numer(), *modulus), inv, *modulus)))
            }
            RingKind::FiniteField { p, k, .. } => {
                let d = big_mod(q.denom(), *p);
                let inv = inv_mod(d, *p).ok_or_else(not_in)?;
                let mut v = vec![0; *k];
                v[0] = mul_mod(big_mod(q.numer(), *p), inv, *p);
                Ok(Value::Gf(v))
            }
            RingKind::PolynomialRing { base, .. } => Ok(base.v_trim(vec![base.v_rational(q)?])),
        }
    }

    fn v_is_zero(&self, a: &Value) -> bool {
        match a {
            Value::Int(n) => n.is_zero(),
            Value::Rat(q) => q.is_zero(),
            Value::Res(r) => *r == 0,
            Value::Gf(v) => v.iter().all(|&c| c == 0),
            Value::Poly(v) => v.is_empty(),
        }
    }

    fn v_trim(&self, mut v: Vec<Value>) -> Value {
        while v.last().is_some_and(|c| self.v_is_zero(c)) {
            v.pop();
        }
        Value::Poly(v)
    }

    fn v_add(&self, a: &Value, b: &Value) -> Value {
        match (self.kind(), a, b) {
            (_, Value::Int(x), Value::Int(y)) => Value::Int(x + y),
            (_, Value::Rat(x), Value::Rat(y)) => Value::Rat(x + y),
            (RingKind::IntegersMod { m: n } | RingKind::PrimeField { p: n }, Value::Res(x), Value::Res(y)) => {
                Value::Res((x + y) % n)
            }
            (RingKind::FiniteField { p, .. }, Value::Gf(x), Value::Gf(y)) => {
                Value::Gf(x.iter().zip(y).map(|(a, b)| (a + b) % p).collect())
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(x), Value::Poly(y)) => {
                let len = x.len().max(y.len());
                let zero = base.v_zero();
                let v = (0..len)
                    .map(|i| base.v_add(x.get(i).unwrap_or(&zero), y.get(i).unwrap_or(&zero)))
                    .collect();
                base.v_trim(v)
            }
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn v_neg(&self, a: &Value) -> Value {
        match (self.kind(), a) {
            (_, Value::Int(x)) => Value::Int(-x),
            (_, Value::Rat(x)) => Value::Rat(-x),
            (RingKind::IntegersMod { m: n } | RingKind::PrimeField { p: n }, Value::Res(x)) => {
                Value::Res((n - x) % n)
            }
            (RingKind::FiniteField { p, .. }, Value::Gf(x)) => {
                Value::Gf(x.iter().map(|c| (p - c) % p).collect())
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(x)) => {
                Value::Poly(x.iter().map(|c| base.v_neg(c)).collect())
            }
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn v_mul(&self, a: &Value, b: &Value) -> Value {
        match (self.kind(), a, b) {
            (_, Value::Int(x), Value::Int(y)) => Value::Int(x * y),
            (_, Value::Rat(x), Value::Rat(y)) => Value::Rat(x * y),
            (RingKind::IntegersMod { m: n } | RingKind::PrimeField { p: n }, Value::Res(x), Value::Res(y)) => {
                Value::Res(mul_mod(*x, *y, *n))
            }
            (RingKind::FiniteField { p, modulus, .. }, Value::Gf(x), Value::Gf(y)) => {
                let mut prod = vec![0u64; x.len() + y.len() - 1];
                for (i, &a) in x.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (j, &b) in y.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + mul_mod(a, b, *p)) % p;
                    }
                }
                Value::Gf(reduce_mod_poly(prod, modulus, *p))
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(x), Value::Poly(y)) => {
                if x.is_empty() || y.is_empty() {
                    return Value::Poly(Vec::new());
                }
                let mut prod = vec![base.v_zero(); x.len() + y.len() - 1];
                for (i, a) in x.iter().enumerate() {
                    for (j, b) in y.iter().enumerate() {
                        prod[i + j] = base.v_add(&prod[i + j], &base.v_mul(a, b));
                    }
                }
                base.v_trim(prod)
            }
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn v_pow(&self, a: &Value, mut e: u64) -> Value {
        let mut base = a.clone();
        let mut acc = self.v_one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.v_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.v_mul(&base, &base);
            }
        }
        acc
    }

    fn v_div_int(&self, a: &Value, n: &BigInt) -> Result<Value> {
        assert!(!n.is_zero(), "division by zero");
        let not_divisible = || Error::NotDivisible {
            value: self.display_value(a),
            divisor: n.to_string(),
            ring: self.to_string(),
        };
        let not_unique = || Error::NotUnique {
            value: self.display_value(a),
            divisor: n.to_string(),
            ring: self.to_string(),
        };
        match (self.kind(), a) {
            (RingKind::Integers, Value::Int(x)) => {
                let (q, r) = x.div_rem(n);
                if r.is_zero() {
                    Ok(Value::Int(q))
                } else {
                    Err(not_divisible())
                }
            }
            (RingKind::Rationals, Value::Rat(x)) => {
                Ok(Value::Rat(x / BigRational::from_integer(n.clone())))
            }
            (RingKind::LocalizedRationals { p }, Value::Rat(x)) => {
                let q = x / BigRational::from_integer(n.clone());
                if (q.denom() % BigInt::from(*p)).is_zero() {
                    Err(not_divisible())
                } else {
                    Ok(Value::Rat(q))
                }
            }
            (RingKind::IntegersMod { m: modulus } | RingKind::PrimeField { p: modulus }, Value::Res(x)) => {
                let nn = big_mod(n, *modulus);
                let g = gcd(nn, *modulus);
                if g == 1 {
                    let inv = inv_mod(nn, *modulus).unwrap();
                    Ok(Value::Res(mul_mod(*x, inv, *modulus)))
                } else if x % g != 0 {
                    Err(not_divisible())
                } else {
                    Err(not_unique())
                }
            }
            (RingKind::FiniteField { p, .. }, Value::Gf(x)) => {
                let nn = big_mod(n, *p);
                if nn == 0 {
                    if x.iter().all(|&c| c == 0) {
                        Err(not_unique())
                    } else {
                        Err(not_divisible())
                    }
                } else {
                    let inv = inv_mod(nn, *p).unwrap();
                    Ok(Value::Gf(x.iter().map(|&c| mul_mod(c, inv, *p)).collect()))
                }
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(x)) => {
                let c = base.characteristic();
                let torsion = c != 0 && gcd(big_mod(n, c), c) != 1;
                let mut out = Vec::with_capacity(x.len());
                for c in x {
                    match base.v_div_int(c, n) {
                        Ok(v) => out.push(v),
                        Err(Error::NotUnique { .. }) => {}
                        Err(_) => return Err(not_divisible()),
                    }
                }
                if torsion || out.len() != x.len() {
                    // every coefficient divisible, but the quotient is ambiguous
                    return Err(not_unique());
                }
                Ok(Value::Poly(out))
            }
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn v_inverse(&self, a: &Value) -> Option<Value> {
        match (self.kind(), a) {
            (RingKind::Integers, Value::Int(x)) => {
                (x.abs().is_one()).then(|| Value::Int(x.clone()))
            }
            (RingKind::Rationals, Value::Rat(x)) => (!x.is_zero()).then(|| Value::Rat(x.recip())),
            (RingKind::LocalizedRationals { p }, Value::Rat(x)) => {
                let pp = BigInt::from(*p);
                (!x.is_zero() && !(x.numer() % &pp).is_zero()).then(|| Value::Rat(x.recip()))
            }
            (RingKind::IntegersMod { m: n } | RingKind::PrimeField { p: n }, Value::Res(x)) => {
                inv_mod(*x, *n).map(Value::Res)
            }
            (RingKind::FiniteField { p, k, .. }, Value::Gf(_)) => {
                if self.v_is_zero(a) {
                    None
                } else {
                    let q = p.pow(*k as u32);
                    Some(self.v_pow(a, q - 2))
                }
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(x)) => {
                if x.len() == 1 {
                    base.v_inverse(&x[0]).map(|c| Value::Poly(vec![c]))
                } else {
                    None
                }
            }
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn check_value(&self, a: &Value) -> bool {
        match (self.kind(), a) {
            (RingKind::Integers, Value::Int(_)) | (RingKind::Rationals, Value::Rat(_)) => true,
            (RingKind::LocalizedRationals { p }, Value::Rat(q)) => {
                !(q.denom() % BigInt::from(*p)).is_zero()
            }
            (RingKind::IntegersMod { m: n } | RingKind::PrimeField { p: n }, Value::Res(r)) => r < n,
            (RingKind::FiniteField { p, k, .. }, Value::Gf(v)) => {
                v.len() == *k && v.iter().all(|c| c < p)
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(v)) => {
                v.iter().all(|c| base.check_value(c))
                    && !v.last().is_some_and(|c| base.v_is_zero(c))
            }
            _ => false,
        }
    }

    fn display_value(&self, a: &Value) -> String {
        match (self.kind(), a) {
            (_, Value::Int(n)) => n.to_string(),
            (_, Value::Rat(q)) => q.to_string(),
            (_, Value::Res(r)) => r.to_string(),
            (_, Value::Gf(v)) => {
                let deg = v.iter().rposition(|&c| c != 0);
                match deg {
                    None => "0".into(),
                    Some(0) => v[0].to_string(),
                    Some(d) => {
                        let parts: Vec<String> = v[..=d].iter().map(|c| c.to_string()).collect();
                        format!("[{}]", parts.join(","))
                    }
                }
            }
            (RingKind::PolynomialRing { base, .. }, Value::Poly(v)) => match v.len() {
                0 => "0".into(),
                1 => base.display_value(&v[0]),
                _ => {
                    let parts: Vec<String> = v.iter().map(|c| base.display_value(c)).collect();
                    format!("[{}]", parts.join(","))
                }
            },
            _ => unreachable!("value does not match ring {self}"),
        }
    }

    fn parse_value(&self, s: &str) -> Result<Value> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot parse {s:?} as an element of {self}"));
        let parse_int = |t: &str| -> Result<BigInt> { t.trim().parse::<BigInt>().map_err(|_| bad()) };
        match self.kind() {
            RingKind::Integers => Ok(Value::Int(parse_int(s)?)),
            RingKind::Rationals | RingKind::LocalizedRationals { .. } | RingKind::IntegersMod { .. } | RingKind::PrimeField { .. } => {
                let q = match s.split_once('/') {
                    Some((a, b)) => {
                        let d = parse_int(b)?;
                        if d.is_zero() {
                            return Err(bad());
                        }
                        BigRational::new(parse_int(a)?, d)
                    }
                    None => BigRational::from_integer(parse_int(s)?),
                };
                self.v_rational(&q)
            }
            RingKind::FiniteField { p, modulus, .. } => {
                let inner = strip_outer_brackets(s);
                let mut raw = Vec::new();
                for part in inner.split(',') {
                    raw.push(big_mod(&parse_int(part)?, *p));
                }
                Ok(Value::Gf(reduce_mod_poly(raw, modulus, *p)))
            }
            RingKind::PolynomialRing { base, .. } => {
                let inner = strip_outer_brackets(s);
                if inner.trim().is_empty() {
                    return Ok(Value::Poly(Vec::new()));
                }
                let parts = split_top_level(inner).ok_or_else(bad)?;
                let coeffs = parts
                    .iter()
                    .map(|part| base.parse_value(part))
                    .collect::<Result<Vec<_>>>()?;
                Ok(base.v_trim(coeffs))
            }
        }
    }
}

/// Removes one pair of brackets when they enclose the whole string.
pub(crate) fn strip_outer_brackets(s: &str) -> &str {
    let s = s.trim();
    if !s.starts_with('[') {
        return s;
    }
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    return if i == s.len() - 1 { &s[1..i] } else { s };
                }
            }
            _ => {}
        }
    }
    s
}

/// Splits on commas that are not nested inside brackets.
pub(crate) fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    out.push(&s[start..]);
    Some(out)
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            RingKind::Integers => write!(f, "int"),
            RingKind::Rationals => write!(f, "rat"),
            RingKind::LocalizedRationals { p } => write!(f, "zloc:{p}"),
            RingKind::IntegersMod { m } => write!(f, "zmod:{m}"),
            RingKind::PrimeField { p } => write!(f, "gf:{p}"),
            RingKind::FiniteField { p, k, modulus, .. } => {
                let cs: Vec<String> = modulus.iter().map(|c| c.to_string()).collect();
                write!(f, "gf:{p}^{k}:{}", cs.join(","))
            }
            RingKind::PolynomialRing { base, var } => write!(f, "poly:{base}:{var}"),
        }
    }
}

impl fmt::Debug for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({self})")
    }
}

impl FromStr for RingDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| -> Result<u64> {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("expected an integer in ring {s:?}, got {t:?}")))
        };
        if s == "int" {
            Ok(Self::integers())
        } else if s == "rat" {
            Ok(Self::rationals())
        } else if let Some(rest) = s.strip_prefix("zloc:") {
            Self::localized(num(rest)?)
        } else if let Some(rest) = s.strip_prefix("zmod:") {
            Self::integers_mod(num(rest)?)
        } else if let Some(rest) = s.strip_prefix("gf:") {
            match rest.split_once('^') {
                None => Self::prime_field(num(rest)?),
                Some((p, tail)) => {
                    let (k, coeffs) = tail
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("expected gf:<p>^<k>:<coeffs>, got {s:?}")))?;
                    let k = num(k)? as usize;
                    let modulus = coeffs.split(',').map(num).collect::<Result<Vec<_>>>()?;
                    if modulus.len() != k + 1 {
                        return Err(Error::InvalidRing(format!(
                            "modulus of a degree-{k} field needs {} coefficients",
                            k + 1
                        )));
                    }
                    Self::finite_field(num(p)?, modulus)
                }
            }
        } else if let Some(rest) = s.strip_prefix("poly:") {
            let (base, var) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected poly:<base>:<var>, got {s:?}")))?;
            Self::polynomial(base.parse()?, var)
        } else {
            Err(Error::Parse(format!("unknown ring syntax {s:?}")))
        }
    }
}

/// An element of a coefficient ring, tagged with its ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: RingDescriptor,
    value: Value,
}

impl RingElement {
    fn from_value(ring: &RingDescriptor, value: Value) -> Self {
        debug_assert!(ring.check_value(&value), "malformed value for {ring}");
        RingElement {
            ring: ring.clone(),
            value,
        }
    }

    pub fn parse(ring: &RingDescriptor, s: &str) -> Result<Self> {
        Ok(Self::from_value(ring, ring.parse_value(s)?))
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn is_one(&self) -> bool {
        self.value == self.ring.v_one()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.ring
            .v_inverse(&self.value)
            .map(|v| Self::from_value(&self.ring, v))
    }

    /// The exact quotient `self / n`.
    ///
    /// Fails with `NotDivisible` when no quotient exists, and with `NotUnique`
    /// when `n` is a zero divisor and several quotients exist.
    pub fn exact_div_int(&self, n: i64) -> Result<Self> {
        self.div_int(&BigInt::from(n))
    }

    /// The unique `y` with `y^p = self` in a perfect ring of characteristic `p`.
    pub fn pth_root(&self) -> Result<Self> {
        match self.ring.kind() {
            RingKind::PrimeField { .. } => Ok(self.clone()),
            RingKind::FiniteField { p, k, .. } => Ok(self.pow(p.pow(*k as u32 - 1))),
            _ => Err(Error::UnsupportedRing {
                op: "pth_root",
                ring: self.ring.to_string(),
            }),
        }
    }

    /// Rational value, when the ring is `Q` or `Z_(p)` or `Z`.
    pub fn to_rational(&self) -> Option<BigRational> {
        match &self.value {
            Value::Int(n) => Some(BigRational::from_integer(n.clone())),
            Value::Rat(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// Residue in `[0, m)` for `Z/m` and `F_p`.
    pub fn to_residue(&self) -> Option<u64> {
        match &self.value {
            Value::Res(r) => Some(*r),
            _ => None,
        }
    }

    /// Base-ring coefficients of a polynomial-ring element, low to high.
    pub fn poly_coeffs(&self) -> Option<Vec<RingElement>> {
        match (self.ring.kind(), &self.value) {
            (RingKind::PolynomialRing { base, .. }, Value::Poly(v)) => Some(
                v.iter()
                    .map(|c| RingElement::from_value(base, c.clone()))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Substitutes `u -> u^n` in a polynomial-ring element.
    pub fn substitute_power(&self, n: u64) -> Result<Self> {
        let (RingKind::PolynomialRing { base, .. }, Value::Poly(v)) = (self.ring.kind(), &self.value)
        else {
            return Err(Error::UnsupportedRing {
                op: "substitute_power",
                ring: self.ring.to_string(),
            });
        };
        if v.is_empty() {
            return Ok(self.clone());
        }
        let n = n as usize;
        let mut out = vec![base.v_zero(); (v.len() - 1) * n + 1];
        for (i, c) in v.iter().enumerate() {
            out[i * n] = c.clone();
        }
        Ok(Self::from_value(&self.ring, Value::Poly(out)))
    }

    fn check_same(&self, other: &Self) {
        assert!(
            self.ring == other.ring,
            "ring mismatch: {} vs {}",
            self.ring,
            other.ring
        );
    }
}

impl CommRing for RingElement {
    fn zero_like(&self) -> Self {
        self.ring.zero()
    }

    fn one_like(&self) -> Self {
        self.ring.one()
    }

    fn is_zero(&self) -> bool {
        self.ring.v_is_zero(&self.value)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.check_same(rhs);
        Self::from_value(&self.ring, self.ring.v_add(&self.value, &rhs.value))
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.check_same(rhs);
        let n = self.ring.v_neg(&rhs.value);
        Self::from_value(&self.ring, self.ring.v_add(&self.value, &n))
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.check_same(rhs);
        Self::from_value(&self.ring, self.ring.v_mul(&self.value, &rhs.value))
    }

    fn neg(&self) -> Self {
        Self::from_value(&self.ring, self.ring.v_neg(&self.value))
    }

    fn int_like(&self, n: &BigInt) -> Self {
        self.ring.int_image(n.clone())
    }

    fn rational_like(&self, q: &BigRational) -> Result<Self> {
        self.ring.rational_image(q)
    }

    fn div_int(&self, n: &BigInt) -> Result<Self> {
        Ok(Self::from_value(&self.ring, self.ring.v_div_int(&self.value, n)?))
    }

    fn pow(&self, e: u64) -> Self {
        Self::from_value(&self.ring, self.ring.v_pow(&self.value, e))
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.display_value(&self.value))
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.ring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(s: &str) -> RingDescriptor {
        s.parse().unwrap()
    }

    fn e(ring: &RingDescriptor, s: &str) -> RingElement {
        RingElement::parse(ring, s).unwrap()
    }

    fn all_rings() -> Vec<RingDescriptor> {
        [
            "int", "rat", "zloc:3", "zmod:6", "zmod:9", "gf:2", "gf:3", "gf:2^2:1,1,1",
            "gf:3^2:1,0,1", "poly:int:u", "poly:zmod:4:u", "poly:poly:int:u:v",
        ]
        .iter()
        .map(|s| r(s))
        .collect()
    }

    #[test]
    fn int_image_examples() {
        for ring in all_rings() {
            assert!(ring.int_image(0).is_zero());
        }
        assert_eq!(r("zmod:3").int_image(5).to_residue(), Some(2));
        let f4 = r("gf:2^2:1,1,1");
        assert_eq!(f4.int_image(7), f4.one());
    }

    #[test]
    fn int_image_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ring in all_rings() {
            for _ in 0..50 {
                let a: i64 = rng.gen_range(-1000..1000);
                let b: i64 = rng.gen_range(-1000..1000);
                assert_eq!(
                    ring.int_image(a + b),
                    ring.int_image(a).add(&ring.int_image(b))
                );
                assert_eq!(
                    ring.int_image(a * b),
                    ring.int_image(a).mul(&ring.int_image(b))
                );
            }
        }
    }

    #[test]
    fn ring_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ring in all_rings() {
            for _ in 0..100 {
                let (a, b, c) = (ring.sample(&mut rng), ring.sample(&mut rng), ring.sample(&mut rng));
                assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)), "{ring}");
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)), "{ring}");
                assert_eq!(a.add(&b), b.add(&a));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                assert_eq!(a.add(&ring.zero()), a);
                assert_eq!(a.mul(&ring.one()), a);
                assert!(a.add(&a.neg()).is_zero());
                assert_eq!(a.sub(&b).add(&b), a);
            }
        }
    }

    #[test]
    fn exact_division() {
        let z = r("int");
        assert_eq!(e(&z, "6").exact_div_int(3).unwrap(), e(&z, "2"));
        assert!(matches!(e(&z, "3").exact_div_int(2), Err(Error::NotDivisible { .. })));
        let zu = r("poly:int:u");
        assert_eq!(e(&zu, "4,2").exact_div_int(2).unwrap(), e(&zu, "2,1"));
        let z4 = r("zmod:4");
        assert!(matches!(e(&z4, "0").exact_div_int(2), Err(Error::NotUnique { .. })));
        assert!(matches!(e(&z4, "1").exact_div_int(2), Err(Error::NotDivisible { .. })));
        assert_eq!(e(&z4, "1").exact_div_int(3).unwrap(), e(&z4, "3"));
        let zl = r("zloc:2");
        assert_eq!(e(&zl, "1").exact_div_int(3).unwrap(), e(&zl, "1/3"));
        assert!(matches!(e(&zl, "1").exact_div_int(2), Err(Error::NotDivisible { .. })));
        let z4u = r("poly:zmod:4:u");
        assert!(matches!(e(&z4u, "2,2").exact_div_int(2), Err(Error::NotUnique { .. })));
        assert!(matches!(e(&z4u, "2,1").exact_div_int(2), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn pth_roots() {
        let f4 = r("gf:2^2:1,1,1");
        let g = f4.generator().unwrap();
        assert_eq!(g.pth_root().unwrap(), e(&f4, "1,1"));
        assert!(f4.zero().pth_root().unwrap().is_zero());
        let f5 = r("gf:5");
        assert_eq!(e(&f5, "3").pth_root().unwrap(), e(&f5, "3"));
        assert!(r("int").one().pth_root().is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ring in [r("gf:3"), f4, r("gf:3^2:1,0,1"), r("gf:2^3:1,1,0,1")] {
            let p = ring.characteristic();
            for _ in 0..100 {
                let (x, y) = (ring.sample(&mut rng), ring.sample(&mut rng));
                assert_eq!(x.pth_root().unwrap().pow(p), x);
                assert_eq!(
                    x.add(&y).pth_root().unwrap(),
                    x.pth_root().unwrap().add(&y.pth_root().unwrap())
                );
            }
        }
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            r("zloc:3").rational_image(&BigRational::new(1.into(), 3.into())),
            Err(Error::NotInRing { .. })
        ));
        assert!(RingElement::parse(&r("zloc:2"), "1/2").is_err());
        assert!("zmod:1".parse::<RingDescriptor>().is_err());
        assert!("gf:4".parse::<RingDescriptor>().is_err());
        assert!("gf:2^2:1,0,1".parse::<RingDescriptor>().is_err());
        assert!("gf:2^2:1,1,0".parse::<RingDescriptor>().is_err());
        assert!("poly:poly:poly:int:a:b:c".parse::<RingDescriptor>().is_err());
        let big = r("gf:2^5:1,0,1,0,0,1");
        assert!(matches!(big.kind(), RingKind::FiniteField { verified: false, .. }));
    }

    #[test]
    fn fractions_are_reduced() {
        let q = r("rat");
        assert_eq!(e(&q, "2/4"), e(&q, "1/2"));
        assert_eq!(e(&q, "3/-6").to_string(), "-1/2");
    }

    #[test]
    fn text_round_trip() {
        for s in ["int", "rat", "zloc:5", "zmod:12", "gf:7", "gf:2^2:1,1,1", "poly:int:u", "poly:poly:gf:3:u:v"] {
            assert_eq!(r(s).to_string(), s);
        }
        let zuv = r("poly:poly:int:u:v");
        let x = e(&zuv, "[1,2],0,[0,3]");
        assert_eq!(x.to_string(), "[[1,2],0,[0,3]]");
        assert_eq!(e(&zuv, &x.to_string()), x);
        assert_eq!(e(&r("gf:2^2:1,1,1"), "1,1").to_string(), "[1,1]");
        assert_eq!(e(&r("zmod:5"), "-1").to_string(), "4");
        assert_eq!(e(&r("zmod:5"), "1/2").to_string(), "3");
    }
}
