//! Truncated Witt vectors over any coefficient ring.
//!
//! Ring operations evaluate the universal integer polynomials from
//! [`crate::universal`], so they are valid over every ring, including rings
//! with torsion. The generic `*_components` functions work over any
//! [`CommRing`] and are shared with the universal-polynomial solver.

use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::profiles::{divisors, Profile};
use crate::rings::{split_top_level, strip_outer_brackets, CommRing, RingDescriptor, RingElement, RingKind};
use crate::universal::{frobenius_poly, structural_poly, Family, StructuralKind, UVar};

fn eval_structural<R: CommRing>(
    profile: &Profile,
    kind: StructuralKind,
    x: &[R],
    y: Option<&[R]>,
) -> Result<Vec<R>> {
    let like = &x[0];
    profile
        .indices()
        .iter()
        .map(|&n| {
            let poly = structural_poly(kind, n)?;
            poly.eval(like, |v: UVar| {
                let pos = profile.position(v.index).expect("profile is divisor-stable");
                match v.family {
                    Family::X => x[pos].clone(),
                    Family::Y => y.expect("binary operation")[pos].clone(),
                }
            })
        })
        .collect()
}

pub(crate) fn add_components<R: CommRing>(profile: &Profile, x: &[R], y: &[R]) -> Result<Vec<R>> {
    eval_structural(profile, StructuralKind::Sum, x, Some(y))
}

pub(crate) fn mul_components<R: CommRing>(profile: &Profile, x: &[R], y: &[R]) -> Result<Vec<R>> {
    eval_structural(profile, StructuralKind::Product, x, Some(y))
}

pub(crate) fn neg_components<R: CommRing>(profile: &Profile, x: &[R]) -> Result<Vec<R>> {
    eval_structural(profile, StructuralKind::Neg, x, None)
}

fn one_components<R: CommRing>(like: &R, len: usize) -> Vec<R> {
    let mut v = vec![like.zero_like(); len];
    v[0] = like.one_like();
    v
}

pub(crate) fn pow_components<R: CommRing>(profile: &Profile, x: &[R], mut e: u64) -> Result<Vec<R>> {
    let mut acc = one_components(&x[0], x.len());
    let mut base = x.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_components(profile, &acc, &base)?;
        }
        e >>= 1;
        if e > 0 {
            base = mul_components(profile, &base, &base)?;
        }
    }
    Ok(acc)
}

/// `n * x` in the Witt ring, by doubling and adding.
pub(crate) fn int_multiple_components<R: CommRing>(profile: &Profile, x: &[R], n: i64) -> Result<Vec<R>> {
    let mut acc = vec![x[0].zero_like(); x.len()];
    let mut base = if n < 0 {
        neg_components(profile, x)?
    } else {
        x.to_vec()
    };
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = add_components(profile, &acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = add_components(profile, &base, &base)?;
        }
    }
    Ok(acc)
}

/// Ghost components `w_n(x) = sum_{d | n} d * x_d^(n/d)`.
pub(crate) fn ghost_components<R: CommRing>(profile: &Profile, x: &[R]) -> Vec<R> {
    profile
        .indices()
        .iter()
        .map(|&n| {
            divisors(n).into_iter().fold(x[0].zero_like(), |acc, d| {
                let xd = &x[profile.position(d).expect("divisor-stable")];
                acc.add(&xd.pow(n / d).scale_int(d as i64))
            })
        })
        .collect()
}

/// Inverts the ghost map by the triangular recursion, dividing by `n` at
/// level `n`.
pub(crate) fn unghost_components<R: CommRing>(profile: &Profile, g: &[R]) -> Result<Vec<R>> {
    let mut x: Vec<R> = Vec::with_capacity(g.len());
    for (pos, &n) in profile.indices().iter().enumerate() {
        let mut rest = g[pos].clone();
        for d in divisors(n) {
            if d == n {
                break;
            }
            let xd = &x[profile.position(d).expect("divisor-stable")];
            rest = rest.sub(&xd.pow(n / d).scale_int(d as i64));
        }
        let xn = rest.div_int(&BigInt::from(n)).map_err(|e| match e {
            Error::NotUnique { .. } => Error::AmbiguousDivision { index: n },
            _ => Error::NotInGhostImage { index: n },
        })?;
        x.push(xn);
    }
    Ok(x)
}

fn parse_components(ring: &RingDescriptor, text: &str) -> Result<Vec<RingElement>> {
    let text = text.trim();
    let parts = split_top_level(text).ok_or_else(|| Error::Parse(format!("unbalanced brackets in {text:?}")))?;
    parts.iter().map(|s| RingElement::parse(ring, strip_outer_brackets(s))).collect()
}

fn check_components(profile: &Profile, ring: &RingDescriptor, components: &[RingElement]) -> Result<()> {
    if components.len() != profile.len() {
        return Err(Error::ComponentCount {
            expected: profile.len(),
            actual: components.len(),
        });
    }
    if let Some(c) = components.iter().find(|c| c.ring() != ring) {
        return Err(Error::RingMismatch {
            left: ring.to_string(),
            right: c.ring().to_string(),
        });
    }
    Ok(())
}

fn join(components: &[RingElement]) -> String {
    components.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// A Witt vector `(x_n)_{n in P}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittVector {
    profile: Profile,
    ring: RingDescriptor,
    components: Vec<RingElement>,
}

impl WittVector {
    pub fn new(profile: Profile, ring: RingDescriptor, components: Vec<RingElement>) -> Result<Self> {
        check_components(&profile, &ring, &components)?;
        Ok(WittVector {
            profile,
            ring,
            components,
        })
    }

    /// Parses a comma-separated component list in profile order.
    pub fn parse(profile: &Profile, ring: &RingDescriptor, text: &str) -> Result<Self> {
        Self::new(profile.clone(), ring.clone(), parse_components(ring, text)?)
    }

    pub fn from_fn(profile: &Profile, ring: &RingDescriptor, f: impl FnMut(u64) -> RingElement) -> Self {
        let components = profile.indices().iter().copied().map(f).collect();
        WittVector {
            profile: profile.clone(),
            ring: ring.clone(),
            components,
        }
    }

    pub fn zero(profile: &Profile, ring: &RingDescriptor) -> Self {
        Self::from_fn(profile, ring, |_| ring.zero())
    }

    /// The unit `(1, 0, 0, ...)`.
    pub fn one(profile: &Profile, ring: &RingDescriptor) -> Self {
        Self::teichmuller(&ring.one(), profile)
    }

    /// `[a] = (a, 0, 0, ...)`.
    pub fn teichmuller(a: &RingElement, profile: &Profile) -> Self {
        let ring = a.ring().clone();
        Self::from_fn(profile, &ring, |n| if n == 1 { a.clone() } else { ring.zero() })
    }

    pub fn sample<R: rand::Rng + ?Sized>(profile: &Profile, ring: &RingDescriptor, rng: &mut R) -> Self {
        Self::from_fn(profile, ring, |_| ring.sample(rng))
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn components(&self) -> &[RingElement] {
        &self.components
    }

    pub fn component(&self, n: u64) -> Option<&RingElement> {
        self.profile.position(n).map(|i| &self.components[i])
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    fn with(&self, components: Vec<RingElement>) -> Self {
        WittVector {
            profile: self.profile.clone(),
            ring: self.ring.clone(),
            components,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch {
                expected: self.profile.to_string(),
                actual: other.profile.to_string(),
            });
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch {
                left: self.ring.to_string(),
                right: other.ring.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with(add_components(&self.profile, &self.components, &other.components)?))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with(mul_components(&self.profile, &self.components, &other.components)?))
    }

    pub fn neg(&self) -> Result<Self> {
        Ok(self.with(neg_components(&self.profile, &self.components)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg()?)
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        Ok(self.with(pow_components(&self.profile, &self.components, e)?))
    }

    /// `n * x`.
    pub fn int_multiple(&self, n: i64) -> Result<Self> {
        Ok(self.with(int_multiple_components(&self.profile, &self.components, n)?))
    }

    pub fn ghost(&self) -> GhostVector {
        GhostVector {
            profile: self.profile.clone(),
            ring: self.ring.clone(),
            components: ghost_components(&self.profile, &self.components),
        }
    }

    /// The Frobenius `F_n`, landing on the profile `{m : nm in P}`.
    pub fn frobenius(&self, n: u64) -> Result<Self> {
        let target = self.profile.quotient(n).ok_or(Error::EmptyOutputProfile(n))?;
        let like = &self.components[0];
        let components = target
            .indices()
            .iter()
            .map(|&m| {
                frobenius_poly(n, m)?.eval(like, |v| self.component(v.index).expect("nm in P").clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WittVector {
            profile: target,
            ring: self.ring.clone(),
            components,
        })
    }

    /// The Verschiebung `V_n` into `target`; `self` must live on
    /// `{m : nm in target}`.
    pub fn verschiebung(&self, n: u64, target: &Profile) -> Result<Self> {
        let expected = target.quotient(n);
        if expected.as_ref() != Some(&self.profile) {
            return Err(Error::ProfileMismatch {
                expected: expected.map_or_else(|| "nonempty quotient".into(), |p| p.to_string()),
                actual: self.profile.to_string(),
            });
        }
        Ok(Self::from_fn(target, &self.ring, |k| {
            if k % n == 0 {
                self.component(k / n).expect("k/n in source").clone()
            } else {
                self.ring.zero()
            }
        }))
    }

    /// `V_n` into the smallest divisor-stable target, the divisor closure of
    /// `n * P`.
    pub fn verschiebung_minimal(&self, n: u64) -> Result<Self> {
        let scaled: Vec<u64> = self.profile.indices().iter().map(|&m| m * n).collect();
        let target = Profile::closure(&scaled)?;
        self.verschiebung(n, &target)
    }

    /// Drops the components outside `sub`.
    pub fn project(&self, sub: &Profile) -> Result<Self> {
        if !sub.is_subset_of(&self.profile) {
            return Err(Error::ProfileMismatch {
                expected: format!("a subset of {}", self.profile),
                actual: sub.to_string(),
            });
        }
        Ok(Self::from_fn(sub, &self.ring, |n| self.component(n).unwrap().clone()))
    }

    /// The nonzero components `(n, x_n)`; `x = sum V_n [x_n]`.
    pub fn decompose(&self) -> Vec<(u64, RingElement)> {
        self.profile
            .indices()
            .iter()
            .zip(&self.components)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&n, c)| (n, c.clone()))
            .collect()
    }

    /// `sum V_n [a_n]` computed with Witt addition in `W_P`.
    pub fn reassemble(pieces: &[(u64, RingElement)], profile: &Profile, ring: &RingDescriptor) -> Result<Self> {
        let mut acc = Self::zero(profile, ring);
        for (n, a) in pieces {
            let source = profile.quotient(*n).ok_or(Error::EmptyOutputProfile(*n))?;
            let piece = Self::teichmuller(a, &source).verschiebung(*n, profile)?;
            acc = acc.add(&piece)?;
        }
        Ok(acc)
    }

    /// The unique `y` with `n * y = self`, computed through ghost components.
    /// Requires the ghost map to be injective, i.e. a torsion-free ring.
    pub fn exact_div_int(&self, n: i64) -> Result<Self> {
        if self.ring.characteristic() != 0 {
            return Err(Error::UnsupportedRing {
                op: "witt exact division",
                ring: self.ring.to_string(),
            });
        }
        let g = self.ghost();
        let divided = g
            .components
            .iter()
            .map(|c| c.exact_div_int(n))
            .collect::<Result<Vec<_>>>()?;
        GhostVector {
            components: divided,
            ..g
        }
        .unghost()
    }

    fn check_ghost_fast_path(&self) -> Result<()> {
        match self.ring.kind() {
            RingKind::Rationals | RingKind::LocalizedRationals { .. } => Ok(()),
            _ => Err(Error::UnsupportedRing {
                op: "ghost fast path",
                ring: self.ring.to_string(),
            }),
        }
    }

    /// Addition through ghost components; only offered over `Q` and `Z_(p)`.
    pub fn add_via_ghost(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        self.check_ghost_fast_path()?;
        self.ghost().add(&other.ghost())?.unghost()
    }

    /// Multiplication through ghost components; only offered over `Q` and
    /// `Z_(p)`.
    pub fn mul_via_ghost(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        self.check_ghost_fast_path()?;
        self.ghost().mul(&other.ghost())?.unghost()
    }

    pub fn to_json(&self) -> Json {
        vector_json(&self.profile, &self.ring, &self.components)
    }
}

fn vector_json(profile: &Profile, ring: &RingDescriptor, components: &[RingElement]) -> Json {
    json!({
        "profile": profile.indices(),
        "ring": ring.to_string(),
        "components": components.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

impl fmt::Display for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.components))
    }
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{} over {}]({})", self.profile, self.ring, self)
    }
}

/// Ghost components `(w_n(x))_{n in P}`, with componentwise ring structure.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GhostVector {
    profile: Profile,
    ring: RingDescriptor,
    components: Vec<RingElement>,
}

impl GhostVector {
    pub fn new(profile: Profile, ring: RingDescriptor, components: Vec<RingElement>) -> Result<Self> {
        check_components(&profile, &ring, &components)?;
        Ok(GhostVector {
            profile,
            ring,
            components,
        })
    }

    pub fn parse(profile: &Profile, ring: &RingDescriptor, text: &str) -> Result<Self> {
        Self::new(profile.clone(), ring.clone(), parse_components(ring, text)?)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn components(&self) -> &[RingElement] {
        &self.components
    }

    pub fn component(&self, n: u64) -> Option<&RingElement> {
        self.profile.position(n).map(|i| &self.components[i])
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&RingElement, &RingElement) -> RingElement) -> Result<Self> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch {
                expected: self.profile.to_string(),
                actual: other.profile.to_string(),
            });
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch {
                left: self.ring.to_string(),
                right: other.ring.to_string(),
            });
        }
        Ok(GhostVector {
            profile: self.profile.clone(),
            ring: self.ring.clone(),
            components: self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.mul(b))
    }

    /// The unique Witt vector with these ghost components.
    pub fn unghost(&self) -> Result<WittVector> {
        Ok(WittVector {
            profile: self.profile.clone(),
            ring: self.ring.clone(),
            components: unghost_components(&self.profile, &self.components)?,
        })
    }

    pub fn to_json(&self) -> Json {
        vector_json(&self.profile, &self.ring, &self.components)
    }
}

impl fmt::Display for GhostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.components))
    }
}

impl fmt::Debug for GhostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ghost[{} over {}]({})", self.profile, self.ring, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(s: &str) -> RingDescriptor {
        s.parse().unwrap()
    }

    fn prof(s: &str) -> Profile {
        s.parse().unwrap()
    }

    fn wv(p: &str, r: &str, c: &str) -> WittVector {
        WittVector::parse(&prof(p), &ring(r), c).unwrap()
    }

    #[test]
    fn ghost_examples() {
        assert_eq!(wv("full:3", "int", "1,2,3").ghost().to_string(), "1,5,10");
        let z = ring("int");
        let a = RingElement::parse(&z, "3").unwrap();
        assert_eq!(WittVector::teichmuller(&a, &prof("full:4")).ghost().to_string(), "3,9,27,81");
        assert!(WittVector::zero(&prof("full:5"), &z).ghost().components().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn unghost_examples() {
        let g = GhostVector::parse(&prof("full:3"), &ring("int"), "1,5,10").unwrap();
        assert_eq!(g.unghost().unwrap(), wv("full:3", "int", "1,2,3"));
        let bad = GhostVector::parse(&prof("full:3"), &ring("int"), "0,1,0").unwrap();
        assert_eq!(bad.unghost(), Err(Error::NotInGhostImage { index: 2 }));
        let torsion = GhostVector::parse(&prof("full:2"), &ring("zmod:4"), "0,0").unwrap();
        assert_eq!(torsion.unghost(), Err(Error::AmbiguousDivision { index: 2 }));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = WittVector::sample(&prof("full:6"), &ring("rat"), &mut rng);
            assert_eq!(x.ghost().unghost().unwrap(), x);
        }
    }

    #[test]
    fn arithmetic_examples() {
        let x = wv("ptyp:2:1", "gf:2", "1,0");
        assert_eq!(x.add(&x).unwrap().to_string(), "0,1");
        let z = ring("int");
        let two = WittVector::teichmuller(&z.int_image(2), &prof("full:5"));
        let three = WittVector::teichmuller(&z.int_image(3), &prof("full:5"));
        let six = WittVector::teichmuller(&z.int_image(6), &prof("full:5"));
        assert_eq!(two.mul(&three).unwrap(), six);
        let one = WittVector::one(&prof("full:2"), &z);
        assert_eq!(one.neg().unwrap().to_string(), "-1,-1");
        assert_eq!(one.to_string(), "1,0");
        // Z/4: (1,1) + (1,0): S_1 = 2, S_2 = 1 + 0 - 1 = 0
        assert_eq!(wv("full:2", "zmod:4", "1,1").add(&wv("full:2", "zmod:4", "1,0")).unwrap().to_string(), "2,0");
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = wv("full:2", "int", "1,1");
        let b = wv("full:3", "int", "1,1,1");
        assert!(matches!(a.add(&b), Err(Error::ProfileMismatch { .. })));
        let c = wv("full:2", "rat", "1,1");
        assert!(matches!(a.mul(&c), Err(Error::RingMismatch { .. })));
        assert!(matches!(
            WittVector::parse(&prof("full:3"), &ring("int"), "1,2"),
            Err(Error::ComponentCount { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn teichmuller_is_multiplicative_scaling() {
        let z9 = ring("zmod:9");
        let p = prof("full:6");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let a = z9.sample(&mut rng);
            let x = WittVector::sample(&p, &z9, &mut rng);
            let expect = WittVector::from_fn(&p, &z9, |n| a.pow(n).mul(x.component(n).unwrap()));
            assert_eq!(WittVector::teichmuller(&a, &p).mul(&x).unwrap(), expect);
        }
        let two = WittVector::teichmuller(&ring("int").int_image(2), &prof("full:3"));
        assert_eq!(two.mul(&wv("full:3", "int", "1,1,1")).unwrap().to_string(), "2,4,8");
        assert!(WittVector::teichmuller(&z9.zero(), &p).is_zero());
    }

    #[test]
    fn verschiebung_examples() {
        let x = wv("full:3", "int", "7,8,9");
        assert_eq!(x.verschiebung(2, &prof("full:6")).unwrap().to_string(), "0,7,0,8,0,9");
        assert!(matches!(x.verschiebung(2, &prof("full:8")), Err(Error::ProfileMismatch { .. })));
        let y = wv("ptyp:3:1", "int", "4,5");
        assert_eq!(y.verschiebung(3, &prof("ptyp:3:2")).unwrap().to_string(), "0,4,5");
        let v = x.verschiebung(2, &prof("full:7")).unwrap();
        let g = v.ghost();
        let gx = x.ghost();
        for k in 1..=7u64 {
            let expect = if k % 2 == 0 {
                gx.component(k / 2).unwrap().scale_int(2)
            } else {
                ring("int").zero()
            };
            assert_eq!(g.component(k).unwrap(), &expect);
        }
        assert_eq!(x.verschiebung_minimal(2).unwrap().profile(), &prof("set:1,2,3,4,6"));
    }

    #[test]
    fn frobenius_examples() {
        let z = ring("int");
        let a = z.int_image(5);
        let fa = WittVector::teichmuller(&a, &prof("full:6")).frobenius(2).unwrap();
        assert_eq!(fa, WittVector::teichmuller(&a.pow(2), &prof("full:3")));
        let v = WittVector::one(&prof("full:3"), &z).verschiebung(2, &prof("full:6")).unwrap();
        assert_eq!(v.frobenius(2).unwrap().to_string(), "2,-1,-2");
        assert_eq!(wv("full:3", "int", "1,1,1").frobenius(4), Err(Error::EmptyOutputProfile(4)));
    }

    #[test]
    fn projection_and_decomposition() {
        let x = wv("full:6", "zmod:6", "1,0,2,0,5,3");
        assert_eq!(x.project(&prof("full:1")).unwrap().to_string(), "1");
        assert_eq!(x.project(x.profile()).unwrap(), x);
        assert!(x.project(&prof("full:7")).is_err());
        let pieces = x.decompose();
        assert_eq!(pieces.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 3, 5, 6]);
        assert_eq!(WittVector::reassemble(&pieces, x.profile(), x.ring()).unwrap(), x);
        assert!(WittVector::zero(&prof("full:4"), &ring("int")).decompose().is_empty());
    }

    #[test]
    fn ghost_fast_path_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for r in ["rat", "zloc:3", "zloc:2"] {
            let rg = ring(r);
            for _ in 0..20 {
                let x = WittVector::sample(&prof("full:6"), &rg, &mut rng);
                let y = WittVector::sample(&prof("full:6"), &rg, &mut rng);
                assert_eq!(x.add_via_ghost(&y).unwrap(), x.add(&y).unwrap());
                assert_eq!(x.mul_via_ghost(&y).unwrap(), x.mul(&y).unwrap());
            }
        }
        let t = wv("full:2", "zmod:4", "1,1");
        assert!(t.add_via_ghost(&t).is_err());
    }
}
