//! Canonical maps into Witt rings: the section `phi: A -> W(A)` determined by
//! a family of commuting Frobenius lifts, and the diagonal `W -> W(W)`.

use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::profiles::{divisors, factorize, Profile};
use crate::rings::{CommRing, RingDescriptor, RingElement};
use crate::universal::delta_poly;
use crate::witt::WittVector;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LiftFamily {
    /// `sigma_p = id` on `Z`.
    Identity,
    /// `sigma_p(u) = u^p` on `Z[u]`.
    PowerSubstitution,
}

/// A ring together with commuting Frobenius lifts `sigma_p`, one per prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusLiftSpec {
    ring: RingDescriptor,
    family: LiftFamily,
}

impl FrobeniusLiftSpec {
    pub fn identity() -> Self {
        FrobeniusLiftSpec {
            ring: RingDescriptor::integers(),
            family: LiftFamily::Identity,
        }
    }

    pub fn power_substitution() -> Self {
        FrobeniusLiftSpec {
            ring: RingDescriptor::polynomial(RingDescriptor::integers(), "u").expect("depth 1"),
            family: LiftFamily::PowerSubstitution,
        }
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn family(&self) -> LiftFamily {
        self.family
    }

    /// `sigma_n`, the composite of `sigma_p` over the prime factors of `n`.
    pub fn sigma(&self, n: u64, a: &RingElement) -> Result<RingElement> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch {
                left: self.ring.to_string(),
                right: a.ring().to_string(),
            });
        }
        match self.family {
            LiftFamily::Identity => Ok(a.clone()),
            LiftFamily::PowerSubstitution => {
                let mut out = a.clone();
                for (p, e) in factorize(n) {
                    for _ in 0..e {
                        out = out.substitute_power(p)?;
                    }
                }
                Ok(out)
            }
        }
    }
}

impl std::str::FromStr for FrobeniusLiftSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(Self::identity()),
            "power" => Ok(Self::power_substitution()),
            _ => Err(Error::Parse(format!("unknown lift spec {s:?}, expected id or power"))),
        }
    }
}

/// The unique ring map `phi: A -> W_P(A)` with `w_n(phi(a)) = sigma_n(a)`,
/// built by `y_n = (sigma_n(a) - sum_{d | n, d < n} d y_d^{n/d}) / n`.
pub fn phi(spec: &FrobeniusLiftSpec, a: &RingElement, profile: &Profile) -> Result<WittVector> {
    let mut comps: Vec<RingElement> = Vec::with_capacity(profile.len());
    for &n in profile.indices() {
        let mut rest = spec.sigma(n, a)?;
        for d in divisors(n) {
            if d == n {
                break;
            }
            let yd = &comps[profile.position(d).expect("divisor-stable")];
            rest = rest.sub(&yd.pow(n / d).scale_int(d as i64));
        }
        let yn = rest.div_int(&BigInt::from(n)).map_err(|e| Error::DivisibilityViolation {
            index: n,
            detail: e.to_string(),
        })?;
        comps.push(yn);
    }
    WittVector::new(profile.clone(), spec.ring.clone(), comps)
}

/// An element of `W_outer(W_inner(A))`.
#[derive(Clone, PartialEq, Eq)]
pub struct NestedWitt {
    outer: Profile,
    inner: Profile,
    ring: RingDescriptor,
    components: Vec<WittVector>,
}

impl NestedWitt {
    pub fn new(outer: Profile, inner: Profile, ring: RingDescriptor, components: Vec<WittVector>) -> Result<Self> {
        if components.len() != outer.len() {
            return Err(Error::ComponentCount {
                expected: outer.len(),
                actual: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.profile() != &inner || c.ring() != &ring) {
            return Err(Error::ProfileMismatch {
                expected: format!("{inner} over {ring}"),
                actual: format!("{} over {}", c.profile(), c.ring()),
            });
        }
        Ok(NestedWitt {
            outer,
            inner,
            ring,
            components,
        })
    }

    pub fn outer(&self) -> &Profile {
        &self.outer
    }

    pub fn inner(&self) -> &Profile {
        &self.inner
    }

    pub fn components(&self) -> &[WittVector] {
        &self.components
    }

    pub fn component(&self, n: u64) -> Option<&WittVector> {
        self.outer.position(n).map(|i| &self.components[i])
    }

    /// The outer ghost component `sum_{d | n} d * c_d^{n/d}`, computed in the
    /// Witt ring `W_inner(A)`.
    pub fn outer_ghost(&self, n: u64) -> Result<WittVector> {
        let mut acc = WittVector::zero(&self.inner, &self.ring);
        for d in divisors(n) {
            let c = self.component(d).ok_or_else(|| Error::ProfileMismatch {
                expected: format!("{d} in {}", self.outer),
                actual: self.outer.to_string(),
            })?;
            acc = acc.add(&c.pow(n / d)?.int_multiple(d as i64)?)?;
        }
        Ok(acc)
    }

    /// Applies the ring map `w_n: W_inner(A) -> A` to every outer component.
    pub fn map_inner_ghost(&self, n: u64) -> Result<WittVector> {
        if !self.inner.contains(n) {
            return Err(Error::ProfileMismatch {
                expected: format!("{n} in {}", self.inner),
                actual: self.inner.to_string(),
            });
        }
        let comps = self
            .components
            .iter()
            .map(|c| c.ghost().component(n).unwrap().clone())
            .collect();
        WittVector::new(self.outer.clone(), self.ring.clone(), comps)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "outer_profile": self.outer.indices(),
            "inner_profile": self.inner.indices(),
            "ring": self.ring.to_string(),
            "components": self.components.iter()
                .map(|c| c.components().iter().map(|e| e.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for NestedWitt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| format!("[{c}]")).collect();
        f.write_str(&parts.join(","))
    }
}

impl fmt::Debug for NestedWitt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}](W[{} over {}])({})", self.outer, self.inner, self.ring, self)
    }
}

/// The diagonal `W_{full:ab}(A) -> W_{full:a}(W_{full:b}(A))`, characterised by
/// `outer ghost_n = F_n` and `W(w_n) = F_n`.
pub fn delta(x: &WittVector, a: u64, b: u64) -> Result<NestedWitt> {
    let expected = Profile::full(a * b)?;
    if x.profile() != &expected {
        return Err(Error::ProfileMismatch {
            expected: expected.to_string(),
            actual: x.profile().to_string(),
        });
    }
    let outer = Profile::full(a)?;
    let inner = Profile::full(b)?;
    let like = &x.components()[0];
    let mut components = Vec::with_capacity(a as usize);
    for n in 1..=a {
        let comps = (1..=b)
            .map(|m| {
                delta_poly(a, b, n, m)?.eval(like, |v| x.component(v.index).expect("nm <= ab").clone())
            })
            .collect::<Result<Vec<_>>>()?;
        components.push(WittVector::new(inner.clone(), x.ring().clone(), comps)?);
    }
    NestedWitt::new(outer, inner, x.ring().clone(), components)
}
