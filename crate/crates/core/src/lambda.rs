//! The power-series model `1 + tA[[t]]` of big Witt vectors, truncated at
//! order `N`.
//!
//! A Witt vector `x` over `full:N` corresponds to `prod_n (1 - x_n t^n)`.
//! Witt addition becomes series multiplication, and `D = -t f'/f` sends the
//! series of `x` to the generating series of its ghost components. This gives
//! a second, independent implementation of the ring laws.

use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::profiles::{gcd, Profile};
use crate::rings::{split_top_level, strip_outer_brackets, CommRing, RingDescriptor, RingElement};
use crate::witt::WittVector;

/// `a_0 + a_1 t + ... + a_N t^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    ring: RingDescriptor,
    coeffs: Vec<RingElement>,
}

impl TruncatedSeries {
    pub fn new(ring: &RingDescriptor, coeffs: Vec<RingElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parse("a series needs at least a constant term".into()));
        }
        if let Some(c) = coeffs.iter().find(|c| c.ring() != ring) {
            return Err(Error::RingMismatch {
                left: ring.to_string(),
                right: c.ring().to_string(),
            });
        }
        Ok(TruncatedSeries {
            ring: ring.clone(),
            coeffs,
        })
    }

    /// The series `1`, the Witt zero.
    pub fn one(ring: &RingDescriptor, order: usize) -> Self {
        let mut coeffs = vec![ring.zero(); order + 1];
        coeffs[0] = ring.one();
        TruncatedSeries {
            ring: ring.clone(),
            coeffs,
        }
    }

    /// `1 - a t^m`, truncated.
    pub fn linear_factor(a: &RingElement, m: usize, order: usize) -> Self {
        let mut s = Self::one(a.ring(), order);
        if m <= order {
            s.coeffs[m] = a.neg();
        }
        s
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &RingElement {
        &self.coeffs[i]
    }

    pub fn is_unit_series(&self) -> bool {
        self.coeffs[0].is_one()
    }

    fn require_unit(&self) -> Result<()> {
        if self.is_unit_series() {
            Ok(())
        } else {
            Err(Error::NotUnitSeries)
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch {
                left: self.ring.to_string(),
                right: other.ring.to_string(),
            });
        }
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    /// Product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.order();
        let mut out = vec![self.ring.zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(TruncatedSeries {
            ring: self.ring.clone(),
            coeffs: out,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(TruncatedSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect(),
        })
    }

    /// `1/f` for `f` with constant term 1.
    pub fn reciprocal(&self) -> Result<Self> {
        self.require_unit()?;
        let n = self.order();
        let mut inv: Vec<RingElement> = Vec::with_capacity(n + 1);
        inv.push(self.ring.one());
        for k in 1..=n {
            let mut acc = self.ring.zero();
            for i in 1..=k {
                acc = acc.add(&self.coeffs[i].mul(&inv[k - i]));
            }
            inv.push(acc.neg());
        }
        Ok(TruncatedSeries {
            ring: self.ring.clone(),
            coeffs: inv,
        })
    }

    /// Formal derivative, kept at the same order (top coefficient 0).
    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut coeffs: Vec<RingElement> = (1..=n).map(|i| self.coeffs[i].scale_int(i as i64)).collect();
        coeffs.push(self.ring.zero());
        TruncatedSeries {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// `t -> t^n`, landing at order `out_order`.
    pub fn substitute_power(&self, n: usize, out_order: usize) -> Self {
        let mut coeffs = vec![self.ring.zero(); out_order + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * n <= out_order {
                coeffs[i * n] = c.clone();
            }
        }
        TruncatedSeries {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        TruncatedSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    /// Parses `1 + c1*t + c2*t^2 + ...` at the given order.
    pub fn parse(ring: &RingDescriptor, order: usize, text: &str) -> Result<Self> {
        let mut coeffs = vec![ring.zero(); order + 1];
        for (sign, term) in split_terms(text)? {
            let (coeff_text, power) = parse_term(term)?;
            if power > order {
                continue;
            }
            let mut c = match coeff_text {
                Some(s) => RingElement::parse(ring, strip_outer_brackets(s))?,
                None => ring.one(),
            };
            if sign {
                c = c.neg();
            }
            coeffs[power] = coeffs[power].add(&c);
        }
        Ok(TruncatedSeries {
            ring: ring.clone(),
            coeffs,
        })
    }

    /// Builds a series from a coefficient list such as `["1", "-2", "0"]`.
    pub fn from_coeff_strs(ring: &RingDescriptor, coeffs: &[String]) -> Result<Self> {
        let cs = coeffs
            .iter()
            .map(|s| RingElement::parse(ring, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ring, cs)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "ring": self.ring.to_string(),
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Splits on top-level `+`/`-`, returning `(negated, term)` pairs.
fn split_terms(text: &str) -> Result<Vec<(bool, &str)>> {
    let text = text.trim();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut neg = false;
    let bytes = text.as_bytes();
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            b'[' => depth += 1,
            b']' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                // a sign directly after '*', '^', '/' or at the start belongs to the term
                let prev = text[..i].trim_end().chars().last();
                if matches!(prev, None | Some('*' | '^' | '/')) {
                    continue;
                }
                let term = text[start..i].trim();
                if !term.is_empty() {
                    out.push((neg, term));
                }
                neg = ch == b'-';
                start = i + 1;
            }
            _ => {}
        }
    }
    let term = text[start..].trim();
    if term.is_empty() {
        return Err(Error::Parse(format!("dangling operator in series {text:?}")));
    }
    out.push((neg, term));
    Ok(out)
}

/// `c`, `c*t`, `c*t^k`, `t`, `t^k`.
fn parse_term(term: &str) -> Result<(Option<&str>, usize)> {
    let bad = || Error::Parse(format!("cannot parse series term {term:?}"));
    let (coeff, var) = match term.rsplit_once('*') {
        Some((c, v)) if v.trim_start().starts_with('t') => (Some(c.trim()), v.trim()),
        Some(_) => return Err(bad()),
        None if term.starts_with('t') => (None, term),
        None if term.starts_with("-t") => (Some("-1"), &term[1..]),
        None => return Ok((Some(term), 0)),
    };
    let power = match var.strip_prefix('t') {
        Some("") => 1,
        Some(rest) => rest
            .strip_prefix('^')
            .and_then(|k| k.trim().parse().ok())
            .ok_or_else(bad)?,
        None => return Err(bad()),
    };
    Ok((coeff, power))
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            match (i, body.as_str()) {
                (0, b) => write!(f, "{b}")?,
                (1, "1") => write!(f, "t")?,
                (1, b) => write!(f, "{b}*t")?,
                (_, "1") => write!(f, "t^{i}")?,
                (_, b) => write!(f, "{b}*t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[{} mod t^{}]({})", self.ring, self.order() + 1, self)
    }
}

fn full_order(x: &WittVector) -> Result<usize> {
    x.profile().as_full().map(|n| n as usize).ok_or_else(|| Error::ProfileMismatch {
        expected: "a full profile".into(),
        actual: x.profile().to_string(),
    })
}

/// `prod_{n <= N} (1 - x_n t^n)` truncated at `t^N`.
pub fn witt_to_lambda(x: &WittVector) -> Result<TruncatedSeries> {
    let n = full_order(x)?;
    let mut f = TruncatedSeries::one(x.ring(), n);
    for (i, c) in x.components().iter().enumerate() {
        if !c.is_zero() {
            f = f.mul(&TruncatedSeries::linear_factor(c, i + 1, n))?;
        }
    }
    Ok(f)
}

/// Inverse of [`witt_to_lambda`]: peel off `(1 - y_n t^n)` one degree at a
/// time.
pub fn lambda_to_witt(f: &TruncatedSeries) -> Result<WittVector> {
    f.require_unit()?;
    let n = f.order();
    let ring = f.ring().clone();
    let profile = Profile::full(n.max(1) as u64)?;
    let mut rest = f.clone();
    let mut comps = Vec::with_capacity(n);
    for k in 1..=n {
        let yk = rest.coeffs[k].neg();
        if !yk.is_zero() {
            // divide by (1 - y_k t^k): multiply by sum_j y_k^j t^(jk)
            let mut geo = TruncatedSeries::one(&ring, n);
            let mut pw = ring.one();
            for j in 1..=n / k {
                pw = pw.mul(&yk);
                geo.coeffs[j * k] = pw.clone();
            }
            rest = rest.mul(&geo)?;
        }
        comps.push(yk);
    }
    if n == 0 {
        comps.push(ring.zero());
    }
    WittVector::new(profile, ring, comps)
}

/// `D f = -t f'/f`; coefficient `n` of `D(f_x)` is the ghost component
/// `w_n(x)`. Uses the series reciprocal, so it is defined over every ring.
pub fn d_operator(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let q = f.derivative().mul(&f.reciprocal()?)?;
    let n = f.order();
    let mut coeffs = vec![f.ring.zero(); n + 1];
    for (c, qc) in coeffs[1..].iter_mut().zip(&q.coeffs) {
        *c = qc.neg();
    }
    Ok(TruncatedSeries {
        ring: f.ring.clone(),
        coeffs,
    })
}

/// Witt addition: the series product.
pub fn lambda_witt_add(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.require_unit()?;
    g.require_unit()?;
    f.mul(g)
}

/// Witt negation: the series reciprocal.
pub fn lambda_witt_neg(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.reciprocal()
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `(1 - c t^m)^e` truncated at `order`.
fn factor_power(c: &RingElement, m: usize, e: u64, order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::one(c.ring(), order);
    let minus_c = c.neg();
    let mut pw = c.ring().one();
    for k in 1..=e {
        let deg = m * k as usize;
        if deg > order {
            break;
        }
        pw = pw.mul(&minus_c);
        s.coeffs[deg] = pw.mul(&c.ring().int_image(binomial(e, k)));
    }
    s
}

/// Witt multiplication through the product formula
/// `prod_{d,e} (1 - x_d^{m/d} y_e^{m/e} t^m)^{gcd(d,e)}` with `m = lcm(d,e)`.
pub fn lambda_witt_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.check_same(g)?;
    let x = lambda_to_witt(f)?;
    let y = lambda_to_witt(g)?;
    let n = f.order();
    let mut out = TruncatedSeries::one(f.ring(), n);
    for d in 1..=n {
        let xd = &x.components()[d - 1];
        if xd.is_zero() {
            continue;
        }
        for e in 1..=n {
            let ye = &y.components()[e - 1];
            if ye.is_zero() {
                continue;
            }
            let g_de = gcd(d as u64, e as u64) as usize;
            let m = d * e / g_de;
            if m > n {
                continue;
            }
            let c = xd.pow((m / d) as u64).mul(&ye.pow((m / e) as u64));
            out = out.mul(&factor_power(&c, m, g_de as u64, n))?;
        }
    }
    Ok(out)
}

/// `F_n` on series, through Witt coordinates. Output order `N / n`.
pub fn frobenius_lambda(n: u64, f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let x = lambda_to_witt(f)?;
    witt_to_lambda(&x.frobenius(n)?)
}

/// `V_n f = f(t^n)`, landing at order `out_order`; requires
/// `out_order / n == f.order()`.
pub fn verschiebung_lambda(n: u64, f: &TruncatedSeries, out_order: usize) -> Result<TruncatedSeries> {
    f.require_unit()?;
    if n == 0 || out_order / n as usize != f.order() {
        return Err(Error::OrderMismatch(f.order(), out_order / n.max(1) as usize));
    }
    Ok(f.substitute_power(n as usize, out_order))
}

/// Parses a JSON coefficient array (strings or integers) into a series.
pub fn series_from_json(ring: &RingDescriptor, value: &Json) -> Result<TruncatedSeries> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Parse("expected a JSON array of coefficients".into()))?;
    let strs: Vec<String> = arr
        .iter()
        .map(|v| match v {
            Json::String(s) => Ok(s.clone()),
            Json::Number(n) => Ok(n.to_string()),
            _ => Err(Error::Parse(format!("bad coefficient {v}"))),
        })
        .collect::<Result<_>>()?;
    TruncatedSeries::from_coeff_strs(ring, &strs)
}

/// Coefficients from a comma-separated list, for the CLI.
pub fn series_from_list(ring: &RingDescriptor, text: &str) -> Result<TruncatedSeries> {
    let parts = split_top_level(text).ok_or_else(|| Error::Parse(format!("unbalanced brackets in {text:?}")))?;
    let strs: Vec<String> = parts.iter().map(|s| strip_outer_brackets(s).to_string()).collect();
    TruncatedSeries::from_coeff_strs(ring, &strs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(s: &str) -> RingDescriptor {
        s.parse().unwrap()
    }

    #[test]
    fn conversions() {
        let z = ring("int");
        let a = z.int_image(3);
        let p4 = Profile::full(4).unwrap();
        let ta = WittVector::teichmuller(&a, &p4);
        assert_eq!(witt_to_lambda(&ta).unwrap().to_string(), "1 - 3*t");
        assert_eq!(witt_to_lambda(&WittVector::zero(&p4, &z)).unwrap(), TruncatedSeries::one(&z, 4));
        let x = WittVector::parse(&Profile::full(2).unwrap(), &z, "5,7").unwrap();
        assert_eq!(witt_to_lambda(&x).unwrap().to_string(), "1 - 5*t - 7*t^2");
        let f = TruncatedSeries::parse(&z, 3, "1 + t").unwrap();
        assert_eq!(lambda_to_witt(&f).unwrap().to_string(), "-1,0,0");
        assert!(lambda_to_witt(&TruncatedSeries::one(&z, 3)).unwrap().is_zero());
        let p = ptyp();
        assert!(witt_to_lambda(&WittVector::zero(&p, &z)).is_err());
    }

    fn ptyp() -> Profile {
        Profile::p_typical(2, 2).unwrap()
    }

    #[test]
    fn round_trip_over_torsion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z6 = ring("zmod:6");
        let p = Profile::full(8).unwrap();
        for _ in 0..50 {
            let x = WittVector::sample(&p, &z6, &mut rng);
            assert_eq!(lambda_to_witt(&witt_to_lambda(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn d_operator_examples() {
        let z = ring("int");
        let f = TruncatedSeries::parse(&z, 4, "1 - 2*t").unwrap();
        assert_eq!(d_operator(&f).unwrap().to_string(), "2*t + 4*t^2 + 8*t^3 + 16*t^4");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z9 = ring("zmod:9");
        let p = Profile::full(7).unwrap();
        for _ in 0..30 {
            let x = WittVector::sample(&p, &z9, &mut rng);
            let d = d_operator(&witt_to_lambda(&x).unwrap()).unwrap();
            assert_eq!(&d.coeffs()[1..], x.ghost().components());
            let y = WittVector::sample(&p, &z9, &mut rng);
            let (f, g) = (witt_to_lambda(&x).unwrap(), witt_to_lambda(&y).unwrap());
            assert_eq!(d_operator(&f.mul(&g).unwrap()).unwrap(), d.add(&d_operator(&g).unwrap()).unwrap());
        }
    }

    #[test]
    fn additive_structure() {
        let z = ring("int");
        let one_minus_t = TruncatedSeries::parse(&z, 3, "1 - t").unwrap();
        let inv = lambda_witt_neg(&one_minus_t).unwrap();
        assert_eq!(inv.to_string(), "1 + t + t^2 + t^3");
        assert_eq!(one_minus_t.mul(&inv).unwrap(), TruncatedSeries::one(&z, 3));
        let p3 = Profile::full(3).unwrap();
        let neg_one = WittVector::one(&p3, &z).neg().unwrap();
        assert_eq!(lambda_to_witt(&inv).unwrap(), neg_one);
    }

    #[test]
    fn multiplicative_structure() {
        let z = ring("int");
        let f = TruncatedSeries::parse(&z, 5, "1 - 2*t").unwrap();
        let g = TruncatedSeries::parse(&z, 5, "1 - 7*t").unwrap();
        assert_eq!(lambda_witt_mul(&f, &g).unwrap().to_string(), "1 - 14*t");
        let one = TruncatedSeries::one(&z, 5);
        assert_eq!(lambda_witt_mul(&f, &one).unwrap(), one);
    }

    #[test]
    fn frobenius_and_verschiebung() {
        let z = ring("int");
        let f = TruncatedSeries::parse(&z, 6, "1 - 3*t").unwrap();
        assert_eq!(frobenius_lambda(2, &f).unwrap().to_string(), "1 - 9*t");
        let g = TruncatedSeries::parse(&z, 3, "1 - 3*t").unwrap();
        assert_eq!(verschiebung_lambda(2, &g, 6).unwrap().to_string(), "1 - 3*t^2");
        assert!(verschiebung_lambda(2, &g, 8).is_err());
        // split polynomials: F_n prod (1 - a_i t) = prod (1 - a_i^n t)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let roots: Vec<RingElement> = (0..3).map(|_| z.sample(&mut rng)).collect();
            for n in [2u64, 3] {
                let order = 8usize;
                let out = order / n as usize;
                let mut prod = TruncatedSeries::one(&z, order);
                let mut expect = TruncatedSeries::one(&z, out);
                for a in &roots {
                    prod = prod.mul(&TruncatedSeries::linear_factor(a, 1, order)).unwrap();
                    expect = expect.mul(&TruncatedSeries::linear_factor(&a.pow(n), 1, out)).unwrap();
                }
                assert_eq!(frobenius_lambda(n, &prod).unwrap(), expect);
            }
        }
    }

    #[test]
    fn series_text() {
        let q = ring("rat");
        let s = TruncatedSeries::parse(&q, 4, "1 + 1/2*t - 3*t^3 + t^4").unwrap();
        assert_eq!(s.to_string(), "1 + 1/2*t - 3*t^3 + t^4");
        assert_eq!(TruncatedSeries::parse(&q, 4, &s.to_string()).unwrap(), s);
        let zu = ring("poly:int:u");
        let s = TruncatedSeries::parse(&zu, 2, "1 + [0,-1]*t").unwrap();
        assert_eq!(s.coeff(1).to_string(), "[0,-1]");
        assert!(TruncatedSeries::parse(&q, 2, "1 +").is_err());
    }
}
