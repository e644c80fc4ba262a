//! Arithmetic in `Z/p^K` with Teichmüller representatives, used as an
//! independent model of `W_p(F_p)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{is_prime, Profile};
use crate::rings::{RingDescriptor, RingElement, RingKind};
use crate::witt::WittVector;

/// A residue modulo `p^K`, kept in `[0, p^K)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PAdicTrunc {
    p: u64,
    precision: u32,
    value: BigInt,
}

impl PAdicTrunc {
    pub fn new(p: u64, precision: u32, value: impl Into<BigInt>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let modulus = BigInt::from(p).pow(precision);
        Ok(PAdicTrunc {
            p,
            precision,
            value: value.into().mod_floor(&modulus),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.precision)
    }

    fn wrap(&self, value: BigInt) -> Self {
        PAdicTrunc {
            p: self.p,
            precision: self.precision,
            value: value.mod_floor(&self.modulus()),
        }
    }

    fn check(&self, other: &Self) {
        assert!(
            self.p == other.p && self.precision == other.precision,
            "mixed p-adic precisions"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        self.wrap(&self.value + &other.value)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        self.wrap(&self.value * &other.value)
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.value.modpow(&BigInt::from(e), &self.modulus()))
    }

    /// Reduction to a lower precision.
    pub fn reduce(&self, precision: u32) -> Self {
        assert!(precision <= self.precision);
        PAdicTrunc::new(self.p, precision, self.value.clone()).expect("prime")
    }
}

impl fmt::Display for PAdicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.precision)
    }
}

fn field_prime(ring: &RingDescriptor) -> Result<u64> {
    match ring.kind() {
        RingKind::PrimeField { p } => Ok(*p),
        _ => Err(Error::UnsupportedRing {
            op: "witt_to_padic",
            ring: ring.to_string(),
        }),
    }
}

/// The Teichmüller representative of `a` modulo `p^K`: iterate `x -> x^p`
/// from the lift in `[0, p)` until the value stops changing.
pub fn teichmuller_lift(a: &RingElement, precision: u32) -> Result<PAdicTrunc> {
    let p = field_prime(a.ring())?;
    let digit = a.to_residue().expect("prime field element");
    teichmuller_digit(p, digit, precision)
}

pub fn teichmuller_digit(p: u64, digit: u64, precision: u32) -> Result<PAdicTrunc> {
    let mut x = PAdicTrunc::new(p, precision, digit)?;
    for _ in 0..=precision {
        let next = x.pow(p);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    unreachable!("p-power iteration stabilises after K steps")
}

/// `sum_{n < L} tau(x_{p^n}) p^n mod p^L` for `x` over `ptyp:p:(L-1)`.
pub fn witt_to_padic(x: &WittVector) -> Result<PAdicTrunc> {
    let p = field_prime(x.ring())?;
    let profile = x.profile();
    if *profile != Profile::p_typical(p, profile.len() as u32 - 1)? {
        return Err(Error::ProfileMismatch {
            expected: format!("ptyp:{p}:{}", profile.len() - 1),
            actual: profile.to_string(),
        });
    }
    let precision = profile.len() as u32;
    let mut acc = PAdicTrunc::new(p, precision, 0)?;
    let mut scale = BigInt::one();
    for c in x.components() {
        let t = teichmuller_lift(c, precision)?;
        acc = acc.add(&acc.wrap(t.value() * &scale));
        scale *= p;
    }
    Ok(acc)
}

/// Inverse of [`witt_to_padic`]: peel off Teichmüller digits.
pub fn padic_to_witt(v: &PAdicTrunc) -> Result<WittVector> {
    let ring = RingDescriptor::prime_field(v.p)?;
    let profile = Profile::p_typical(v.p, v.precision - 1)?;
    let mut rest = v.value.clone();
    let mut comps = Vec::with_capacity(v.precision as usize);
    for _ in 0..v.precision {
        let digit = (&rest % v.p).try_into().expect("digit below p");
        let t = teichmuller_digit(v.p, digit, v.precision)?;
        rest = (&rest - t.value()).mod_floor(&v.modulus());
        debug_assert!((&rest % v.p).is_zero());
        rest /= v.p;
        comps.push(ring.int_image(digit));
    }
    WittVector::new(profile, ring, comps)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Counterexample {
    pub op: &'static str,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub witt_image: String,
    pub padic_value: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OracleReport {
    pub p: u64,
    pub len: u32,
    pub exhaustive: bool,
    pub pairs_checked: u64,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

fn digits_of(x: &WittVector) -> Vec<String> {
    x.components().iter().map(|c| c.to_string()).collect()
}

fn check_pair(x: &WittVector, y: &WittVector) -> Result<Option<Counterexample>> {
    let (fx, fy) = (witt_to_padic(x)?, witt_to_padic(y)?);
    for (op, w, v) in [
        ("add", x.add(y)?, fx.add(&fy)),
        ("mul", x.mul(y)?, fx.mul(&fy)),
    ] {
        let image = witt_to_padic(&w)?;
        if image != v {
            return Ok(Some(Counterexample {
                op,
                x: digits_of(x),
                y: digits_of(y),
                witt_image: image.value().to_string(),
                padic_value: v.value().to_string(),
            }));
        }
    }
    Ok(None)
}

/// Compares Witt addition and multiplication over `F_p` at length `L` with
/// arithmetic in `Z/p^L`, either on `trials` seeded random pairs or on all
/// `p^{2L}` pairs.
pub fn oracle_check(p: u64, len: u32, trials: u64, exhaustive: bool, seed: u64) -> Result<OracleReport> {
    if len == 0 {
        return Err(Error::EmptyProfile(0));
    }
    let ring = RingDescriptor::prime_field(p)?;
    let profile = Profile::p_typical(p, len - 1)?;
    let mut report = OracleReport {
        p,
        len,
        exhaustive,
        pairs_checked: 0,
        passed: true,
        counterexample: None,
    };
    let record = |x: &WittVector, y: &WittVector, report: &mut OracleReport| -> Result<bool> {
        report.pairs_checked += 1;
        if let Some(c) = check_pair(x, y)? {
            report.passed = false;
            report.counterexample = Some(c);
            return Ok(false);
        }
        Ok(true)
    };
    if exhaustive {
        let size = BigInt::from(p).pow(len);
        let all: Vec<WittVector> = num_iter(&size)
            .map(|v| padic_to_witt(&PAdicTrunc::new(p, len, v)?))
            .collect::<Result<_>>()?;
        for x in &all {
            for y in &all {
                if !record(x, y, &mut report)? {
                    return Ok(report);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let x = WittVector::sample(&profile, &ring, &mut rng);
            let y = WittVector::sample(&profile, &ring, &mut rng);
            if !record(&x, &y, &mut report)? {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

fn num_iter(bound: &BigInt) -> impl Iterator<Item = BigInt> + '_ {
    let mut i = BigInt::zero();
    std::iter::from_fn(move || {
        if &i < bound {
            let out = i.clone();
            i += 1;
            Some(out)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fp(p: u64) -> RingDescriptor {
        RingDescriptor::prime_field(p).unwrap()
    }

    #[test]
    fn teichmuller_values() {
        let f5 = fp(5);
        assert_eq!(teichmuller_lift(&f5.int_image(2), 3).unwrap().value(), &BigInt::from(57));
        assert!(teichmuller_lift(&f5.zero(), 3).unwrap().value().is_zero());
        assert!(teichmuller_lift(&f5.one(), 3).unwrap().value().is_one());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2u64, 3, 5, 7] {
            for _ in 0..20 {
                let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
                let k = rng.gen_range(1..6);
                let ta = teichmuller_digit(p, a, k).unwrap();
                let tb = teichmuller_digit(p, b, k).unwrap();
                assert_eq!(ta.pow(p), ta);
                assert_eq!(ta.value() % p, BigInt::from(a));
                assert_eq!(ta.mul(&tb), teichmuller_digit(p, a * b % p, k).unwrap());
            }
        }
    }

    #[test]
    fn digit_examples() {
        let f2 = fp(2);
        let prof = Profile::p_typical(2, 2).unwrap();
        let x = WittVector::parse(&prof, &f2, "1,1,0").unwrap();
        let y = WittVector::parse(&prof, &f2, "1,0,1").unwrap();
        assert_eq!(witt_to_padic(&x).unwrap().value(), &BigInt::from(3));
        assert_eq!(witt_to_padic(&WittVector::parse(&prof, &f2, "1,0,0").unwrap()).unwrap().value(), &BigInt::one());
        assert!(x.add(&y).unwrap().is_zero());
        let mut seen: Vec<BigInt> = (0..8)
            .map(|v| {
                let w = padic_to_witt(&PAdicTrunc::new(2, 3, v).unwrap()).unwrap();
                witt_to_padic(&w).unwrap().value().clone()
            })
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn oracle_small() {
        let r = oracle_check(2, 3, 0, true, 0).unwrap();
        assert!(r.passed);
        assert_eq!(r.pairs_checked, 64);
        let r = oracle_check(3, 2, 0, true, 0).unwrap();
        assert!(r.passed);
        assert_eq!(r.pairs_checked, 81);
        assert!(oracle_check(5, 3, 50, false, 1).unwrap().passed);
    }

    #[test]
    fn frobenius_is_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [2u64, 3, 5] {
            let prof = Profile::p_typical(p, 3).unwrap();
            let short = Profile::p_typical(p, 2).unwrap();
            for _ in 0..20 {
                let x = WittVector::sample(&prof, &fp(p), &mut rng);
                let fx = x.frobenius(p).unwrap();
                assert_eq!(
                    witt_to_padic(&fx).unwrap(),
                    witt_to_padic(&x.project(&short).unwrap()).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_other_rings() {
        let prof = Profile::p_typical(2, 1).unwrap();
        let x = WittVector::zero(&prof, &RingDescriptor::integers_mod(4).unwrap());
        assert!(matches!(witt_to_padic(&x), Err(Error::UnsupportedRing { .. })));
    }
}
