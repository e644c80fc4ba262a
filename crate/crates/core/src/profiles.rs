//! Divisor-stable index sets and the small number theory they need.
//!
//! A profile is a finite set `P` of positive integers containing 1 and closed
//! under taking divisors. Every Witt vector in this crate is indexed by one.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Returns `Some((p, k))` when `n = p^k` with `k >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factorize(n).as_slice() {
        [(p, k)] => Some((*p, *k)),
        _ => None,
    }
}

/// `true` when `n` is `p^r` for some `r >= 0`.
pub fn is_power_of(n: u64, p: u64) -> bool {
    let mut n = n;
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

pub fn moebius(n: u64) -> i64 {
    assert!(n >= 1, "moebius is defined for n >= 1");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All positive divisors of `n`, increasing.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// A finite divisor-stable set of indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    indices: Arc<[u64]>,
}

impl Profile {
    /// `{1, 2, ..., n}`.
    pub fn full(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyProfile(n));
        }
        Ok(Profile {
            indices: (1..=n).collect::<Vec<_>>().into(),
        })
    }

    /// `{1, p, ..., p^k}`.
    pub fn p_typical(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let indices: Vec<u64> = (0..=k).map(|i| p.pow(i)).collect();
        Ok(Profile {
            indices: indices.into(),
        })
    }

    /// Sorts, deduplicates and checks divisor stability.
    pub fn validate(indices: &[u64]) -> Result<Self> {
        let mut v: Vec<u64> = indices.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptyProfile(0));
        }
        if v[0] == 0 {
            return Err(Error::Parse("profile indices must be positive".into()));
        }
        for &n in &v {
            for d in divisors(n) {
                if d < n && v.binary_search(&d).is_err() {
                    return Err(Error::NotDivisorStable { divisor: d, index: n });
                }
            }
        }
        Ok(Profile { indices: v.into() })
    }

    /// The divisor closure of an arbitrary nonempty set of positive integers.
    pub fn closure(indices: &[u64]) -> Result<Self> {
        let mut all: Vec<u64> = indices.iter().flat_map(|&n| divisors(n)).collect();
        all.push(1);
        Profile::validate(&all)
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.indices.last().expect("profiles contain 1")
    }

    pub fn contains(&self, n: u64) -> bool {
        self.position(n).is_some()
    }

    pub fn position(&self, n: u64) -> Option<usize> {
        self.indices.binary_search(&n).ok()
    }

    pub fn is_subset_of(&self, other: &Profile) -> bool {
        self.indices.iter().all(|&n| other.contains(n))
    }

    /// `{m : n*m in P}`, the source profile of `V_n` and target of `F_n`.
    /// Empty exactly when `n` is not in `P`.
    pub fn quotient(&self, n: u64) -> Option<Profile> {
        let v: Vec<u64> = self
            .indices
            .iter()
            .filter(|&&m| m % n == 0)
            .map(|&m| m / n)
            .collect();
        if v.is_empty() {
            None
        } else {
            Some(Profile { indices: v.into() })
        }
    }

    /// `Some(n)` when this is `{1, ..., n}`.
    pub fn as_full(&self) -> Option<u64> {
        let n = self.max();
        (self.len() as u64 == n).then_some(n)
    }

    /// `Some((p, k))` when this is `{1, p, ..., p^k}` with `k >= 1`.
    pub fn as_p_typical(&self) -> Option<(u64, u32)> {
        let (p, k) = prime_power(self.max())?;
        (self.len() == k as usize + 1 && self.indices.iter().all(|&n| is_power_of(n, p)))
            .then_some((p, k))
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_full() {
            return write!(f, "full:{n}");
        }
        if let Some((p, k)) = self.as_p_typical() {
            return write!(f, "ptyp:{p}:{k}");
        }
        write!(f, "set:")?;
        for (i, n) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({self})")
    }
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a nonnegative integer, got {s:?}")))
}

impl FromStr for Profile {
    type Err = Error;

    /// Accepts `full:<N>`, `ptyp:<p>:<k>` and `set:<comma list>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("full:") {
            let n = parse_u64(rest)?;
            if n == 0 {
                return Err(Error::Parse("full profile bound must be positive".into()));
            }
            Profile::full(n)
        } else if let Some(rest) = s.strip_prefix("ptyp:") {
            let (p, k) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected ptyp:<p>:<k>, got {s:?}")))?;
            let k = u32::try_from(parse_u64(k)?).map_err(|_| Error::Parse("k too large".into()))?;
            Profile::p_typical(parse_u64(p)?, k)
        } else if let Some(rest) = s.strip_prefix("set:") {
            let v = rest.split(',').map(parse_u64).collect::<Result<Vec<_>>>()?;
            Profile::validate(&v)
        } else {
            Err(Error::Parse(format!("unknown profile syntax {s:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_profiles() {
        assert_eq!(Profile::full(1).unwrap().indices(), &[1]);
        assert_eq!(Profile::full(6).unwrap().indices(), &[1, 2, 3, 4, 5, 6]);
        assert!(Profile::full(0).is_err());
        let p = Profile::full(10).unwrap();
        for n in 1..20 {
            assert_eq!(p.contains(n), n <= 10);
        }
    }

    #[test]
    fn p_typical_profiles() {
        assert_eq!(Profile::p_typical(2, 2).unwrap().indices(), &[1, 2, 4]);
        assert_eq!(Profile::p_typical(3, 0).unwrap().indices(), &[1]);
        assert_eq!(Profile::p_typical(4, 1), Err(Error::NotPrime(4)));
    }

    #[test]
    fn validation() {
        assert_eq!(
            Profile::validate(&[6, 3, 2, 1, 2]).unwrap().indices(),
            &[1, 2, 3, 6]
        );
        assert_eq!(
            Profile::validate(&[1, 4]),
            Err(Error::NotDivisorStable { divisor: 2, index: 4 })
        );
        assert_eq!(
            Profile::validate(&[2]),
            Err(Error::NotDivisorStable { divisor: 1, index: 2 })
        );
        let p = Profile::validate(&[1, 2, 3, 6]).unwrap();
        assert_eq!(Profile::validate(p.indices()).unwrap(), p);
    }

    #[test]
    fn moebius_values() {
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(4), 0);
        assert_eq!(moebius(6), 1);
        assert_eq!(moebius(30), -1);
    }

    #[test]
    fn moebius_divisor_sums() {
        for n in 1..=1000u64 {
            let s: i64 = divisors(n).into_iter().map(moebius).sum();
            assert_eq!(s, if n == 1 { 1 } else { 0 }, "n = {n}");
        }
    }

    #[test]
    fn quotients() {
        let p = Profile::full(6).unwrap();
        assert_eq!(p.quotient(2).unwrap(), Profile::full(3).unwrap());
        assert_eq!(p.quotient(7), None);
        let q = Profile::p_typical(3, 3).unwrap();
        assert_eq!(q.quotient(3).unwrap(), Profile::p_typical(3, 2).unwrap());
        assert_eq!(
            Profile::closure(&[4, 6]).unwrap().indices(),
            &[1, 2, 3, 4, 6]
        );
    }

    #[test]
    fn text_round_trip() {
        for s in ["full:6", "ptyp:2:3", "set:1,2,3,6", "full:1"] {
            let p: Profile = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!("ptyp:3:0".parse::<Profile>().unwrap().to_string(), "full:1");
        assert!("set:1,4".parse::<Profile>().is_err());
    }
}
