//! The Artin-Hasse exponential and the idempotent `eps_p` with its section
//! `iota_p: W_p -> W`.
//!
//! `eps_p` is evaluated from the p-integral universal polynomials of
//! [`crate::universal::epsilon_polys`], so it works over any
//! `Z_(p)`-algebra, including `F_p` and `Z/p^k` where the rational
//! intermediate values of the series construction do not exist.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::lambda::{witt_to_lambda, TruncatedSeries};
use crate::profiles::{is_power_of, is_prime, moebius, Profile};
use crate::rings::{CommRing, RingDescriptor, RingElement};
use crate::universal::epsilon_poly;
use crate::witt::WittVector;

/// Coefficients `c_0 .. c_N` of a power series over `Z_(p)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AHSeries {
    pub p: u64,
    pub coeffs: Vec<BigRational>,
}

impl AHSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_p_integral(&self) -> bool {
        p_integral(&self.coeffs, self.p)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "p": self.p,
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for AHSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(", "))
    }
}

fn p_integral(coeffs: &[BigRational], p: u64) -> bool {
    let p = BigInt::from(p);
    coeffs.iter().all(|c| !(c.denom() % &p).is_zero())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn series_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().min(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `exp(g)` for `g` with zero constant term, via `k e_k = sum_j j g_j e_{k-j}`.
fn series_exp(g: &[BigRational]) -> Vec<BigRational> {
    debug_assert!(g[0].is_zero());
    let mut e = vec![BigRational::one()];
    for k in 1..g.len() {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            if !g[j].is_zero() {
                acc += &g[j] * BigRational::from_integer(BigInt::from(j)) * &e[k - j];
            }
        }
        e.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    e
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `exp(x + x^p/p + x^{p^2}/p^2 + ...)` modulo `x^{N+1}`.
pub fn hexp_coeffs(p: u64, order: usize) -> Result<AHSeries> {
    check_prime(p)?;
    let mut g = vec![BigRational::zero(); order + 1];
    let mut pk = 1usize;
    while pk <= order {
        g[pk] = q(1, pk as i64);
        pk *= p as usize;
    }
    let coeffs = series_exp(&g);
    if let Some(c) = coeffs
        .iter()
        .find(|c| (c.denom() % BigInt::from(p)).is_zero())
    {
        return Err(Error::PIntegralityViolation {
            poly: format!("hexp_{p}"),
            p,
            coeff: c.to_string(),
        });
    }
    Ok(AHSeries { p, coeffs })
}

/// The product `prod_{n <= N, p !| n} (1 - x^n)^{-mu(n)/n}`, each factor
/// computed as `exp(-mu(n)/n * log(1 - x^n))`.
pub fn hexp_moebius(p: u64, order: usize) -> Result<AHSeries> {
    check_prime(p)?;
    let mut acc = vec![BigRational::zero(); order + 1];
    acc[0] = BigRational::one();
    for n in 1..=order {
        if (n as u64).is_multiple_of(p) {
            continue;
        }
        let mu = moebius(n as u64);
        if mu == 0 {
            continue;
        }
        // -mu/n * log(1 - x^n) = mu/n * sum_m x^{nm}/m
        let mut g = vec![BigRational::zero(); order + 1];
        let mut m = 1;
        while n * m <= order {
            g[n * m] = q(mu, (n * m) as i64);
            m += 1;
        }
        acc = series_mul(&acc, &series_exp(&g));
    }
    Ok(AHSeries { p, coeffs: acc })
}

/// The unique `g` with `g(0) = 1` and `g^n = f`, for `f(0) = 1`.
pub fn nth_root_series(f: &[BigRational], n: u64) -> Result<Vec<BigRational>> {
    if f.first() != Some(&BigRational::one()) {
        return Err(Error::NotUnitSeries);
    }
    // h = f^a with f h' = a f' h, a = 1/n
    let a = q(1, n as i64);
    let mut h = vec![BigRational::one()];
    for k in 1..f.len() {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            if f[j].is_zero() {
                continue;
            }
            let w = &a * BigRational::from_integer(BigInt::from(j)) - BigRational::from_integer(BigInt::from(k - j));
            acc += w * &f[j] * &h[k - j];
        }
        h.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    Ok(h)
}

pub fn series_pow(f: &[BigRational], n: u64) -> Vec<BigRational> {
    let mut acc = vec![BigRational::zero(); f.len()];
    acc[0] = BigRational::one();
    for _ in 0..n {
        acc = series_mul(&acc, f);
    }
    acc
}

fn require_zp_algebra(p: u64, ring: &RingDescriptor, op: &'static str) -> Result<()> {
    check_prime(p)?;
    if ring.is_zp_algebra(p) {
        Ok(())
    } else {
        Err(Error::UnsupportedRing {
            op,
            ring: ring.to_string(),
        })
    }
}

/// The additive idempotent `eps_p`: keeps the ghost components at powers of
/// `p`, kills the others. Only the components of `x` at powers of `p` are
/// read.
pub fn epsilon_p(p: u64, x: &WittVector) -> Result<WittVector> {
    require_zp_algebra(p, x.ring(), "epsilon_p")?;
    let like = &x.components()[0];
    let comps = x
        .profile()
        .indices()
        .iter()
        .map(|&n| {
            epsilon_poly(p, n)?.eval(like, |v| x.component(v.index).expect("divisor of n").clone())
        })
        .collect::<Result<Vec<_>>>()?;
    WittVector::new(x.profile().clone(), x.ring().clone(), comps)
}

/// The section `iota_p: W_p -> W` over `full:N`: embed at the powers of `p`,
/// then apply `eps_p`. Requires `p^r <= N < p^(r+1)` for a source `ptyp:p:r`.
pub fn iota_p(p: u64, x: &WittVector, order: u64) -> Result<WittVector> {
    require_zp_algebra(p, x.ring(), "iota_p")?;
    let ptyp = x.profile();
    if !ptyp.indices().iter().all(|&n| is_power_of(n, p)) {
        return Err(Error::ProfileMismatch {
            expected: format!("a {p}-typical profile"),
            actual: ptyp.to_string(),
        });
    }
    // full:N must have exactly the p-power indices of the source
    if order < ptyp.max() || order / p >= ptyp.max() {
        return Err(Error::ProfileMismatch {
            expected: format!("target order in [{}, {})", ptyp.max(), ptyp.max() * p),
            actual: format!("full:{order}"),
        });
    }
    let full = Profile::full(order)?;
    let ring = x.ring().clone();
    let embedded = WittVector::from_fn(&full, &ring, |n| {
        x.component(n).cloned().unwrap_or_else(|| ring.zero())
    });
    epsilon_p(p, &embedded)
}

/// How the product of Artin-Hasse factors is arranged when comparing it with
/// `eps_p` in the series model.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexpOrientation {
    /// Use `hexp(...)^{-1}` instead of `hexp(...)`.
    pub reciprocal: bool,
    /// First exponent `r` in the product over `x_{p^r} t^{p^r}`.
    pub start: u32,
}

impl HexpOrientation {
    pub const CANDIDATES: [HexpOrientation; 4] = [
        HexpOrientation { reciprocal: false, start: 0 },
        HexpOrientation { reciprocal: false, start: 1 },
        HexpOrientation { reciprocal: true, start: 0 },
        HexpOrientation { reciprocal: true, start: 1 },
    ];
}

/// `hexp(c t^k)` truncated at `order`, over the ring of `c`.
fn hexp_substituted(h: &AHSeries, c: &RingElement, k: usize, order: usize) -> Result<TruncatedSeries> {
    let ring = c.ring();
    let mut s = TruncatedSeries::one(ring, order);
    let mut coeffs = s.coeffs().to_vec();
    let mut pw = ring.one();
    for j in 1..=order / k {
        pw = pw.mul(c);
        coeffs[j * k] = ring.rational_image(&h.coeffs[j])?.mul(&pw);
    }
    s = TruncatedSeries::new(ring, coeffs)?;
    Ok(s)
}

/// `prod_{r >= start} hexp(x_{p^r} t^{p^r})^{+-1}` in the series model.
pub fn hexp_product(p: u64, x: &WittVector, orientation: HexpOrientation) -> Result<TruncatedSeries> {
    check_prime(p)?;
    let order = x.profile().as_full().ok_or_else(|| Error::ProfileMismatch {
        expected: "a full profile".into(),
        actual: x.profile().to_string(),
    })? as usize;
    let h = hexp_coeffs(p, order)?;
    let mut acc = TruncatedSeries::one(x.ring(), order);
    let mut pr = (p as usize).pow(orientation.start);
    while pr <= order {
        let c = x.component(pr as u64).expect("p^r <= N");
        let mut factor = hexp_substituted(&h, c, pr, order)?;
        if orientation.reciprocal {
            factor = factor.reciprocal()?;
        }
        acc = acc.mul(&factor)?;
        pr *= p as usize;
    }
    Ok(acc)
}

/// The candidate orientations whose product series equals the series of
/// `eps_p(x)` for every sample `x`.
pub fn matching_orientations(p: u64, samples: &[WittVector]) -> Result<Vec<HexpOrientation>> {
    let mut out = Vec::new();
    'cand: for cand in HexpOrientation::CANDIDATES {
        for x in samples {
            let expect = witt_to_lambda(&epsilon_p(p, x)?)?;
            if hexp_product(p, x, cand)? != expect {
                continue 'cand;
            }
        }
        out.push(cand);
    }
    Ok(out)
}

/// Checks the nth-root lemma on `f = 1 - x^m`: the `n`-th root has
/// `p`-integral coefficients for `p !| n`.
pub fn nth_root_is_p_integral(p: u64, n: u64, m: usize, order: usize) -> Result<bool> {
    let mut f = vec![BigRational::zero(); order + 1];
    f[0] = BigRational::one();
    if m <= order {
        f[m] = -BigRational::one();
    }
    let g = nth_root_series(&f, n)?;
    Ok(p_integral(&g, p))
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
    fn hexp_low_orders() {
        let h = hexp_coeffs(2, 4).unwrap();
        assert_eq!(h.coeffs, vec![q(1, 1), q(1, 1), q(1, 1), q(2, 3), q(2, 3)]);
        assert_eq!(h.to_string(), "1, 1, 1, 2/3, 2/3");
        let h3 = hexp_coeffs(3, 3).unwrap();
        assert_eq!(h3.coeffs, vec![q(1, 1), q(1, 1), q(1, 2), q(1, 2)]);
        for p in [2, 3, 5, 7] {
            let h = hexp_coeffs(p, 3).unwrap();
            assert!(h.coeffs[0].is_one() && h.coeffs[1].is_one());
        }
        assert_eq!(hexp_coeffs(4, 3), Err(Error::NotPrime(4)));
    }

    #[test]
    fn moebius_product() {
        for p in [2, 3, 5] {
            assert_eq!(hexp_moebius(p, 20).unwrap(), hexp_coeffs(p, 20).unwrap());
        }
        // a single n = 1 factor is the geometric series
        let h = hexp_moebius(2, 1).unwrap();
        assert_eq!(h.coeffs, vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn nth_roots() {
        let mut f = vec![BigRational::zero(); 9];
        f[0] = BigRational::one();
        f[2] = -BigRational::one();
        let g = nth_root_series(&f, 3).unwrap();
        assert_eq!(series_pow(&g, 3), f);
        assert!(nth_root_is_p_integral(2, 3, 2, 24).unwrap());
        assert!(!nth_root_is_p_integral(3, 3, 2, 24).unwrap());
    }

    #[test]
    fn epsilon_examples() {
        let zl = ring("zloc:2");
        let p4 = Profile::full(4).unwrap();
        let a = RingElement::parse(&zl, "5").unwrap();
        let e = epsilon_p(2, &WittVector::teichmuller(&a, &p4)).unwrap();
        assert_eq!(e.to_string(), "5,0,-125/3,0");
        let z = ring("rat");
        let x = WittVector::from_fn(&p4, &z, |n| if n == 3 { z.int_image(7) } else { z.zero() });
        assert!(epsilon_p(2, &x).unwrap().is_zero());
        assert!(matches!(
            epsilon_p(2, &WittVector::zero(&p4, &ring("int"))),
            Err(Error::UnsupportedRing { .. })
        ));
        assert!(matches!(
            epsilon_p(2, &WittVector::zero(&p4, &ring("zmod:6"))),
            Err(Error::UnsupportedRing { .. })
        ));
    }

    #[test]
    fn epsilon_is_idempotent_and_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p8 = Profile::full(8).unwrap();
        for (p, r) in [(2, "gf:2"), (3, "zloc:3"), (2, "zmod:8"), (2, "gf:2^2:1,1,1")] {
            let rg = ring(r);
            for _ in 0..10 {
                let x = WittVector::sample(&p8, &rg, &mut rng);
                let y = WittVector::sample(&p8, &rg, &mut rng);
                let ex = epsilon_p(p, &x).unwrap();
                assert_eq!(epsilon_p(p, &ex).unwrap(), ex);
                assert_eq!(
                    epsilon_p(p, &x.add(&y).unwrap()).unwrap(),
                    ex.add(&epsilon_p(p, &y).unwrap()).unwrap()
                );
            }
        }
    }

    #[test]
    fn iota_is_a_section() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f3 = ring("gf:3");
        let ptyp = Profile::p_typical(3, 1).unwrap();
        for _ in 0..20 {
            let x = WittVector::sample(&ptyp, &f3, &mut rng);
            let y = iota_p(3, &x, 8).unwrap();
            assert_eq!(y.project(&ptyp).unwrap(), x);
        }
        assert!(iota_p(3, &WittVector::zero(&ptyp, &f3), 8).unwrap().is_zero());
        assert!(iota_p(3, &WittVector::zero(&ptyp, &f3), 2).is_err());
        // index 9 would have no source component
        assert!(iota_p(3, &WittVector::zero(&ptyp, &f3), 9).is_err());
    }

    #[test]
    fn orientation_is_reciprocal_from_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = ring("rat");
        for p in [2u64, 3] {
            let prof = Profile::full(9).unwrap();
            let samples: Vec<WittVector> = (0..3).map(|_| WittVector::sample(&prof, &q, &mut rng)).collect();
            assert_eq!(
                matching_orientations(p, &samples).unwrap(),
                vec![HexpOrientation { reciprocal: true, start: 0 }]
            );
        }
    }
}
