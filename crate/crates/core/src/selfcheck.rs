//! The identity suite behind `witt selfcheck`: every invariant of the library
//! as a named, seeded, randomized check.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::artin_hasse::{
    epsilon_p, hexp_coeffs, hexp_moebius, iota_p, matching_orientations, nth_root_is_p_integral, HexpOrientation,
};
use crate::canonical::{delta, phi, FrobeniusLiftSpec};
use crate::error::Error;
use crate::lambda::{
    d_operator, frobenius_lambda, lambda_to_witt, lambda_witt_add, lambda_witt_mul, lambda_witt_neg,
    verschiebung_lambda, witt_to_lambda,
};
use crate::padic::{oracle_check, teichmuller_digit, witt_to_padic};
use crate::profiles::{divisors, gcd, is_power_of, moebius, Profile};
use crate::rings::{CommRing, RingDescriptor, RingElement};
use crate::universal::{
    epsilon_polys, frobenius_poly, structural_poly, witt_polynomial, witt_polynomial_in, Family, Locality,
    StructuralKind, UPoly,
};
use crate::witt::WittVector;

#[derive(Clone, Debug)]
pub struct Config {
    /// Random trials per randomized check.
    pub trials: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { trials: 100, seed: 2024 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
    pub millis: u128,
}

pub struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type CheckResult = std::result::Result<(), Failure>;
type CheckFn = fn(&Config) -> CheckResult;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(Failure(format!($($fmt)+)));
        }
    };
}

pub const CHECKS: &[(&str, CheckFn)] = &[
    ("moebius_sums", moebius_sums),
    ("coefficient_rings", coefficient_rings),
    ("universal_golden", universal_golden),
    ("universal_integrality", universal_integrality),
    ("universal_ghost_identities", universal_ghost_identities),
    ("universal_support", universal_support),
    ("frobenius_poly_composition", frobenius_poly_composition),
    ("witt_ring_axioms", witt_ring_axioms),
    ("ghost_homomorphism", ghost_homomorphism),
    ("teichmuller_multiplicative", teichmuller_multiplicative),
    ("fv_identities", fv_identities),
    ("frobenius_congruence", frobenius_congruence),
    ("frobenius_non_congruence", frobenius_non_congruence),
    ("char_p_multiplication", char_p_multiplication),
    ("disjoint_support_addition", disjoint_support_addition),
    ("ghost_fast_path", ghost_fast_path),
    ("lambda_equivalence", lambda_equivalence),
    ("lambda_d_operator", lambda_d_operator),
    ("lambda_frobenius_verschiebung", lambda_frobenius_verschiebung),
    ("artin_hasse_series", artin_hasse_series),
    ("artin_hasse_orientation", artin_hasse_orientation),
    ("epsilon_iota", epsilon_iota),
    ("nth_root_integrality", nth_root_integrality),
    ("phi_homomorphism", phi_homomorphism),
    ("delta_identities", delta_identities),
    ("padic_teichmuller", padic_teichmuller),
    ("padic_oracle", padic_oracle),
    ("padic_frobenius", padic_frobenius),
];

pub fn names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

fn run_one(name: &'static str, f: CheckFn, config: &Config) -> Outcome {
    let start = Instant::now();
    let result = std::panic::catch_unwind(|| f(config));
    let detail = match result {
        Ok(Ok(())) => None,
        Ok(Err(Failure(msg))) => Some(msg),
        Err(p) => Some(
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()),
        ),
    };
    Outcome {
        name,
        passed: detail.is_none(),
        detail,
        millis: start.elapsed().as_millis(),
    }
}

/// Runs the selected checks (all when `only` is empty) on worker threads and
/// returns the outcomes in suite order. Unknown names are reported as failures.
pub fn run(config: &Config, only: &[String]) -> Vec<Outcome> {
    let selected: Vec<(&'static str, Option<CheckFn>)> = if only.is_empty() {
        CHECKS.iter().map(|(n, f)| (*n, Some(*f))).collect()
    } else {
        only.iter()
            .map(|want| match CHECKS.iter().find(|(n, _)| n == want) {
                Some((n, f)) => (*n, Some(*f)),
                None => (Box::leak(want.clone().into_boxed_str()) as &'static str, None),
            })
            .collect()
    };
    std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(name, f)| {
                s.spawn(move || match f {
                    Some(f) => run_one(name, f, config),
                    None => Outcome {
                        name,
                        passed: false,
                        detail: Some("no such check".into()),
                        millis: 0,
                    },
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread")).collect()
    })
}

fn rng(config: &Config, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn ring(s: &str) -> RingDescriptor {
    s.parse().expect("built-in ring descriptor")
}

fn profile(s: &str) -> Profile {
    s.parse().expect("built-in profile")
}

pub const AXIOM_RINGS: [&str; 9] = ["int", "rat", "zloc:3", "zmod:6", "zmod:9", "gf:2", "gf:3", "gf:2^2:1,1,1", "poly:int:u"];
pub const AXIOM_PROFILES: [&str; 4] = ["full:8", "ptyp:2:3", "ptyp:3:3", "ptyp:5:2"];

fn moebius_sums(_: &Config) -> CheckResult {
    for n in 1..=1000u64 {
        let s: i64 = divisors(n).into_iter().map(moebius).sum();
        ensure!(s == i64::from(n == 1), "sum of mu over divisors of {n} is {s}");
    }
    Ok(())
}

fn coefficient_rings(config: &Config) -> CheckResult {
    let mut r = rng(config, 1);
    for name in AXIOM_RINGS.iter().chain(["zmod:4", "gf:5", "zloc:2"].iter()) {
        let a = ring(name);
        for _ in 0..config.trials {
            let (x, y, z) = (a.sample(&mut r), a.sample(&mut r), a.sample(&mut r));
            ensure!(x.add(&y).add(&z) == x.add(&y.add(&z)), "{name}: addition not associative");
            ensure!(x.mul(&y).mul(&z) == x.mul(&y.mul(&z)), "{name}: multiplication not associative");
            ensure!(x.add(&y) == y.add(&x) && x.mul(&y) == y.mul(&x), "{name}: not commutative");
            ensure!(x.mul(&y.add(&z)) == x.mul(&y).add(&x.mul(&z)), "{name}: not distributive");
            ensure!(x.add(&a.zero()) == x && x.mul(&a.one()) == x, "{name}: identities");
            ensure!(x.add(&x.neg()).is_zero(), "{name}: negation");
            let (m, n) = (r.gen_range(-50i64..50), r.gen_range(-50i64..50));
            ensure!(a.int_image(m + n) == a.int_image(m).add(&a.int_image(n)), "{name}: int_image additive");
            ensure!(a.int_image(m * n) == a.int_image(m).mul(&a.int_image(n)), "{name}: int_image multiplicative");
            if let crate::rings::RingKind::PrimeField { p } | crate::rings::RingKind::FiniteField { p, .. } = a.kind() {
                let rx = x.pth_root()?;
                ensure!(rx.pow(*p) == x, "{name}: pth_root");
                ensure!(x.add(&y).pth_root()? == rx.add(&y.pth_root()?), "{name}: pth_root additive");
            }
        }
    }
    ensure!(RingElement::parse(&ring("zloc:3"), "1/3").is_err(), "1/3 accepted in zloc:3");
    Ok(())
}

fn universal_golden(_: &Config) -> CheckResult {
    let golden = [
        (structural_poly(StructuralKind::Sum, 1)?, "X1 + Y1"),
        (structural_poly(StructuralKind::Sum, 2)?, "-X1*Y1 + X2 + Y2"),
        (structural_poly(StructuralKind::Product, 1)?, "X1*Y1"),
        (structural_poly(StructuralKind::Product, 2)?, "X1^2*Y2 + X2*Y1^2 + 2*X2*Y2"),
        (Arc::new(witt_polynomial(6)), "X1^6 + 2*X2^3 + 3*X3^2 + 6*X6"),
    ];
    for (poly, text) in golden {
        ensure!(poly.to_string() == text, "expected {text}, got {poly}");
    }
    Ok(())
}

const KINDS: [StructuralKind; 3] = [StructuralKind::Sum, StructuralKind::Product, StructuralKind::Neg];

fn universal_integrality(_: &Config) -> CheckResult {
    for n in 1..=24u64 {
        for kind in KINDS {
            let s = structural_poly(kind, n)?;
            ensure!(s.is_integral(), "{kind:?} at {n} not integral");
        }
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
        for m in 1..=24 / p {
            ensure!(frobenius_poly(p, m)?.is_integral(), "F_{p} component {m} not integral");
        }
    }
    for p in [2u64, 3, 5] {
        for (i, e) in epsilon_polys(p, 16)?.iter().enumerate() {
            ensure!(
                crate::universal::assert_integral(e, Locality::AtPrime(p)),
                "eps_{p} component {} not {p}-integral",
                i + 1
            );
        }
    }
    Ok(())
}

fn universal_ghost_identities(_: &Config) -> CheckResult {
    for n in 1..=12u64 {
        for kind in KINDS {
            let comps: HashMap<u64, Arc<UPoly>> = divisors(n)
                .into_iter()
                .map(|d| structural_poly(kind, d).map(|s| (d, s)))
                .collect::<crate::Result<_>>()?;
            let lhs = witt_polynomial(n).substitute(|v| (*comps[&v.index]).clone());
            let wx = witt_polynomial_in(Family::X, n);
            let wy = witt_polynomial_in(Family::Y, n);
            let rhs = match kind {
                StructuralKind::Sum => wx.add(&wy),
                StructuralKind::Product => wx.mul(&wy),
                StructuralKind::Neg => wx.neg(),
            };
            ensure!(lhs == rhs, "ghost identity for {kind:?} fails at {n}");
        }
    }
    Ok(())
}

fn universal_support(_: &Config) -> CheckResult {
    for n in 1..=24u64 {
        for kind in KINDS {
            for v in structural_poly(kind, n)?.variables() {
                ensure!(n % v.index == 0, "{kind:?} at {n} uses {v}");
            }
        }
    }
    let again = structural_poly(StructuralKind::Product, 12)?;
    ensure!(*again == *structural_poly(StructuralKind::Product, 12)?, "cache returned a different polynomial");
    Ok(())
}

fn frobenius_poly_composition(_: &Config) -> CheckResult {
    for n in 1..=12u64 {
        for m in 1..=12 / n {
            for k in 1..=12 / (n * m) {
                // component k of F_n(F_m(x)) against component k of F_nm(x)
                let inner: HashMap<u64, Arc<UPoly>> = divisors(n * k)
                    .into_iter()
                    .map(|j| frobenius_poly(m, j).map(|f| (j, f)))
                    .collect::<crate::Result<_>>()?;
                let lhs = frobenius_poly(n, k)?.substitute(|v| (*inner[&v.index]).clone());
                ensure!(lhs == *frobenius_poly(n * m, k)?, "F_{n} F_{m} != F_{} at {k}", n * m);
            }
        }
    }
    Ok(())
}

fn witt_ring_axioms(config: &Config) -> CheckResult {
    let cases: Vec<(usize, &str, &str)> = AXIOM_RINGS
        .iter()
        .flat_map(|r| AXIOM_PROFILES.iter().map(move |p| (*r, *p)))
        .enumerate()
        .map(|(i, (r, p))| (i, r, p))
        .collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|&(i, rn, pn)| s.spawn(move || axioms_for(config, i as u64, rn, pn)))
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("axiom thread"))
    })
}

fn axioms_for(config: &Config, salt: u64, rn: &str, pn: &str) -> CheckResult {
    let mut r = rng(config, 100 + salt);
    let a = ring(rn);
    let p = profile(pn);
    let (zero, one) = (WittVector::zero(&p, &a), WittVector::one(&p, &a));
    for _ in 0..config.trials {
        let x = WittVector::sample(&p, &a, &mut r);
        let y = WittVector::sample(&p, &a, &mut r);
        let z = WittVector::sample(&p, &a, &mut r);
        let at = || format!("{rn} {pn} x = {x} y = {y} z = {z}");
        ensure!(x.add(&y)?.add(&z)? == x.add(&y.add(&z)?)?, "add associativity: {}", at());
        ensure!(x.add(&y)? == y.add(&x)?, "add commutativity: {}", at());
        ensure!(x.mul(&y)?.mul(&z)? == x.mul(&y.mul(&z)?)?, "mul associativity: {}", at());
        ensure!(x.mul(&y)? == y.mul(&x)?, "mul commutativity: {}", at());
        ensure!(x.mul(&y.add(&z)?)? == x.mul(&y)?.add(&x.mul(&z)?)?, "distributivity: {}", at());
        ensure!(x.add(&zero)? == x && x.mul(&one)? == x, "identities: {}", at());
        ensure!(x.add(&x.neg()?)?.is_zero(), "negation: {}", at());
    }
    Ok(())
}

fn ghost_homomorphism(config: &Config) -> CheckResult {
    let mut r = rng(config, 3);
    let p = profile("full:8");
    for rn in ["int", "poly:int:u"] {
        let a = ring(rn);
        for _ in 0..config.trials {
            let x = WittVector::sample(&p, &a, &mut r);
            let y = WittVector::sample(&p, &a, &mut r);
            let (gx, gy) = (x.ghost(), y.ghost());
            ensure!(x.add(&y)?.ghost() == gx.add(&gy)?, "ghost(x+y) over {rn}: x = {x}, y = {y}");
            ensure!(x.sub(&y)?.ghost().components() == gx.add(&y.neg()?.ghost())?.components(), "ghost(x-y) over {rn}");
            ensure!(x.mul(&y)?.ghost() == gx.mul(&gy)?, "ghost(xy) over {rn}: x = {x}, y = {y}");
        }
    }
    Ok(())
}

fn teichmuller_multiplicative(config: &Config) -> CheckResult {
    let mut r = rng(config, 4);
    let p = profile("full:6");
    for rn in ["int", "zmod:6", "gf:2^2:1,1,1", "poly:int:u"] {
        let a = ring(rn);
        for _ in 0..config.trials / 4 + 1 {
            let (s, t) = (a.sample(&mut r), a.sample(&mut r));
            let lhs = WittVector::teichmuller(&s, &p).mul(&WittVector::teichmuller(&t, &p))?;
            ensure!(lhs == WittVector::teichmuller(&s.mul(&t), &p), "[s][t] != [st] over {rn}: s = {s}, t = {t}");
        }
    }
    Ok(())
}

fn full(n: u64) -> Profile {
    Profile::full(n).expect("n >= 1")
}

fn fv_identities(config: &Config) -> CheckResult {
    let mut r = rng(config, 5);
    let k = 2u64;
    for rn in ["int", "zmod:6"] {
        let a = ring(rn);
        for _ in 0..config.trials {
            for n in [2u64, 3] {
                let x = WittVector::sample(&full(k), &a, &mut r);
                // F_n V_n = n
                let fv = x.verschiebung(n, &full(n * k))?.frobenius(n)?;
                ensure!(fv == x.int_multiple(n as i64)?, "F_{n} V_{n} x != {n} x for x = {x} over {rn}");
                // V_n(F_n(x) y) = x V_n(y)
                let big = WittVector::sample(&full(n * k), &a, &mut r);
                let y = WittVector::sample(&full(k), &a, &mut r);
                let lhs = big.frobenius(n)?.mul(&y)?.verschiebung(n, &full(n * k))?;
                let rhs = big.mul(&y.verschiebung(n, &full(n * k))?)?;
                ensure!(lhs == rhs, "V_{n}(F_{n}(x) y) != x V_{n}(y) over {rn}: x = {big}, y = {y}");
                for m in [2u64, 3] {
                    // F_n F_m = F_nm
                    let z = WittVector::sample(&full(n * m * k), &a, &mut r);
                    ensure!(
                        z.frobenius(m)?.frobenius(n)? == z.frobenius(n * m)?,
                        "F_{n} F_{m} != F_{} over {rn}: x = {z}",
                        n * m
                    );
                    // V_n V_m = V_nm
                    let vv = x.verschiebung(m, &full(m * k))?.verschiebung(n, &full(n * m * k))?;
                    ensure!(vv == x.verschiebung(n * m, &full(n * m * k))?, "V_{n} V_{m} != V_nm over {rn}: x = {x}");
                    // (V_n x)^m = n^{m-1} V_n(x^m)
                    let lhs = x.verschiebung(n, &full(n * k))?.pow(m)?;
                    let rhs = x.pow(m)?.verschiebung(n, &full(n * k))?.int_multiple(n.pow(m as u32 - 1) as i64)?;
                    ensure!(lhs == rhs, "(V_{n} x)^{m} identity over {rn}: x = {x}");
                    if gcd(m, n) == 1 {
                        // V_m F_n = F_n V_m
                        let w = WittVector::sample(&full(n * k), &a, &mut r);
                        let lhs = w.frobenius(n)?.verschiebung(m, &full(m * k))?;
                        let rhs = w.verschiebung(m, &full(m * n * k))?.frobenius(n)?;
                        ensure!(lhs == rhs, "V_{m} F_{n} != F_{n} V_{m} over {rn}: x = {w}");
                    }
                }
            }
        }
    }
    Ok(())
}

fn frobenius_congruence(config: &Config) -> CheckResult {
    let mut r = rng(config, 6);
    let z = ring("int");
    let p8 = full(8);
    for p in [2u64, 3] {
        let target = p8.quotient(p).expect("p <= 8");
        for _ in 0..config.trials {
            let x = WittVector::sample(&p8, &z, &mut r);
            let diff = x.frobenius(p)?.sub(&x.project(&target)?.pow(p)?)?;
            ensure!(diff.exact_div_int(p as i64).is_ok(), "F_{p}(x) - x^{p} not divisible by {p}: x = {x}");
        }
    }
    Ok(())
}

/// The congruence fails for `n = 6` and `n = 4`: the first component of
/// `F_n(x)` is `w_n(x)`, which differs from `x_1^n` mod `n`.
fn frobenius_non_congruence(_: &Config) -> CheckResult {
    for (n, rn, text) in [(6u64, "zmod:6", "1,0,1,0,0,0"), (4, "zmod:4", "1,1,0,0")] {
        let a = ring(rn);
        let x = WittVector::parse(&full(n), &a, text)?;
        let first = x.frobenius(n)?.components()[0].clone();
        ensure!(first != x.components()[0].pow(n), "F_{n}(x)_1 == x_1^{n} for x = {x} over {rn}");
    }
    Ok(())
}

fn char_p_multiplication(config: &Config) -> CheckResult {
    let mut r = rng(config, 7);
    for (p, rn) in [(2u64, "gf:2"), (3, "gf:3"), (2, "gf:2^2:1,1,1"), (5, "gf:5")] {
        let a = ring(rn);
        let prof = Profile::p_typical(p, 3)?;
        for _ in 0..config.trials / 4 + 1 {
            let x = WittVector::sample(&prof, &a, &mut r);
            let expect = WittVector::from_fn(&prof, &a, |n| {
                if n == 1 {
                    a.zero()
                } else {
                    x.component(n / p).expect("n/p in profile").pow(p)
                }
            });
            ensure!(x.int_multiple(p as i64)? == expect, "{p} x over {rn}: x = {x}");
        }
    }
    Ok(())
}

fn disjoint_support_addition(config: &Config) -> CheckResult {
    let mut r = rng(config, 8);
    let a = ring("zmod:6");
    let p = full(6);
    for _ in 0..config.trials {
        let x = WittVector::sample(&p, &a, &mut r);
        let mask: Vec<bool> = (0..6).map(|_| r.gen()).collect();
        let left = WittVector::from_fn(&p, &a, |n| if mask[n as usize - 1] { x.component(n).unwrap().clone() } else { a.zero() });
        let right = WittVector::from_fn(&p, &a, |n| if mask[n as usize - 1] { a.zero() } else { x.component(n).unwrap().clone() });
        ensure!(left.add(&right)? == x, "disjoint pieces do not add up to x = {x}");
        let pieces = x.decompose();
        ensure!(WittVector::reassemble(&pieces, &p, &a)? == x, "reassembly of x = {x}");
    }
    Ok(())
}

fn ghost_fast_path(config: &Config) -> CheckResult {
    let mut r = rng(config, 9);
    for rn in ["rat", "zloc:2"] {
        let a = ring(rn);
        let p = full(8);
        for _ in 0..config.trials / 2 + 1 {
            let x = WittVector::sample(&p, &a, &mut r);
            let y = WittVector::sample(&p, &a, &mut r);
            ensure!(x.add_via_ghost(&y)? == x.add(&y)?, "ghost add over {rn}: x = {x}, y = {y}");
            ensure!(x.mul_via_ghost(&y)? == x.mul(&y)?, "ghost mul over {rn}: x = {x}, y = {y}");
        }
    }
    Ok(())
}

fn lambda_equivalence(config: &Config) -> CheckResult {
    let mut r = rng(config, 10);
    let p = full(8);
    for rn in ["zmod:6", "gf:3", "int", "gf:2^2:1,1,1"] {
        let a = ring(rn);
        for _ in 0..config.trials {
            let x = WittVector::sample(&p, &a, &mut r);
            let y = WittVector::sample(&p, &a, &mut r);
            let (f, g) = (witt_to_lambda(&x)?, witt_to_lambda(&y)?);
            ensure!(lambda_to_witt(&f)? == x, "round trip over {rn}: x = {x}");
            ensure!(lambda_to_witt(&lambda_witt_add(&f, &g)?)? == x.add(&y)?, "add over {rn}: x = {x}, y = {y}");
            ensure!(lambda_to_witt(&lambda_witt_mul(&f, &g)?)? == x.mul(&y)?, "mul over {rn}: x = {x}, y = {y}");
            ensure!(lambda_to_witt(&lambda_witt_neg(&f)?)? == x.neg()?, "neg over {rn}: x = {x}");
        }
    }
    Ok(())
}

fn lambda_d_operator(config: &Config) -> CheckResult {
    let mut r = rng(config, 11);
    let p = full(8);
    for rn in ["int", "zmod:9", "poly:int:u"] {
        let a = ring(rn);
        for _ in 0..config.trials / 2 + 1 {
            let x = WittVector::sample(&p, &a, &mut r);
            let y = WittVector::sample(&p, &a, &mut r);
            let (f, g) = (witt_to_lambda(&x)?, witt_to_lambda(&y)?);
            let df = d_operator(&f)?;
            ensure!(&df.coeffs()[1..] == x.ghost().components(), "D(f_x) != ghost(x) over {rn}: x = {x}");
            ensure!(d_operator(&lambda_witt_add(&f, &g)?)? == df.add(&d_operator(&g)?)?, "D not additive over {rn}");
        }
    }
    Ok(())
}

fn lambda_frobenius_verschiebung(config: &Config) -> CheckResult {
    let mut r = rng(config, 12);
    for rn in ["int", "zmod:6"] {
        let a = ring(rn);
        for _ in 0..config.trials / 2 + 1 {
            for n in [2u64, 3] {
                let x = WittVector::sample(&full(4 * n), &a, &mut r);
                ensure!(
                    lambda_to_witt(&frobenius_lambda(n, &witt_to_lambda(&x)?)?)? == x.frobenius(n)?,
                    "F_{n} on series over {rn}: x = {x}"
                );
                let y = WittVector::sample(&full(4), &a, &mut r);
                let vy = verschiebung_lambda(n, &witt_to_lambda(&y)?, 4 * n as usize)?;
                ensure!(lambda_to_witt(&vy)? == y.verschiebung(n, &full(4 * n))?, "V_{n} on series over {rn}: y = {y}");
            }
        }
    }
    // split-linear norm oracle: F_n(1 - a t) = 1 - a^n t
    let z = ring("int");
    for _ in 0..config.trials / 4 + 1 {
        let c = z.sample(&mut r);
        let t = WittVector::teichmuller(&c, &full(6));
        for n in [2u64, 3] {
            let f = frobenius_lambda(n, &witt_to_lambda(&t)?)?;
            ensure!(lambda_to_witt(&f)? == WittVector::teichmuller(&c.pow(n), &full(6 / n)), "F_{n}(1 - {c} t)");
        }
    }
    Ok(())
}

fn artin_hasse_series(_: &Config) -> CheckResult {
    for p in [2u64, 3, 5] {
        ensure!(hexp_coeffs(p, 32)? == hexp_moebius(p, 32)?, "hexp expansions differ for p = {p}");
    }
    for p in [2u64, 3, 5, 7] {
        ensure!(hexp_coeffs(p, 64)?.is_p_integral(), "hexp_{p} not {p}-integral");
    }
    let h = hexp_coeffs(2, 4)?;
    ensure!(h.to_string() == "1, 1, 1, 2/3, 2/3", "hexp_2 = {h}");
    Ok(())
}

#[derive(serde::Deserialize)]
struct OrientationFixture {
    orientation: HexpOrientation,
}

fn artin_hasse_orientation(config: &Config) -> CheckResult {
    let fixture: OrientationFixture =
        serde_json::from_str(include_str!("../fixtures/hexp_orientation.json")).map_err(|e| Failure(e.to_string()))?;
    let mut r = rng(config, 13);
    let q = ring("rat");
    for p in [2u64, 3] {
        let samples: Vec<WittVector> = (0..3).map(|_| WittVector::sample(&full(9), &q, &mut r)).collect();
        let found = matching_orientations(p, &samples)?;
        ensure!(found == vec![fixture.orientation], "p = {p}: matching orientations {found:?}");
    }
    Ok(())
}

fn epsilon_iota(config: &Config) -> CheckResult {
    let mut r = rng(config, 14);
    for (p, rn) in [(2u64, "gf:2"), (3, "gf:3"), (2, "zloc:2"), (3, "zloc:3")] {
        let a = ring(rn);
        let ptyp = Profile::p_typical(p, 2)?;
        let order = p * p;
        for _ in 0..config.trials {
            let x = WittVector::sample(&ptyp, &a, &mut r);
            let y = WittVector::sample(&ptyp, &a, &mut r);
            let ix = iota_p(p, &x, order)?;
            ensure!(ix.project(&ptyp)? == x, "iota_{p} not a section over {rn}: x = {x}");
            ensure!(
                iota_p(p, &x.add(&y)?, order)? == ix.add(&iota_p(p, &y, order)?)?,
                "iota_{p} not additive over {rn}: x = {x}, y = {y}"
            );
            if a.characteristic() == 0 {
                let g = ix.ghost();
                for (i, &n) in g.profile().indices().iter().enumerate() {
                    let expect = if is_power_of(n, p) {
                        x.ghost().component(n).expect("p-power index").clone()
                    } else {
                        a.zero()
                    };
                    ensure!(g.components()[i] == expect, "ghost of iota_{p}(x) at {n}: x = {x}");
                }
            }
            let big = WittVector::sample(&full(order), &a, &mut r);
            let e = epsilon_p(p, &big)?;
            ensure!(epsilon_p(p, &e)? == e, "eps_{p} not idempotent over {rn}");
            ensure!(
                epsilon_p(p, &big.add(&ix)?)? == e.add(&epsilon_p(p, &ix)?)?,
                "eps_{p} not additive over {rn}"
            );
        }
    }
    Ok(())
}

fn nth_root_integrality(_: &Config) -> CheckResult {
    for p in [2u64, 3, 5] {
        for n in 1..=12u64 {
            if n % p == 0 {
                continue;
            }
            for m in 1..=4usize {
                ensure!(nth_root_is_p_integral(p, n, m, 24)?, "({n})th root of 1 - x^{m} not {p}-integral");
            }
        }
    }
    ensure!(!nth_root_is_p_integral(2, 2, 1, 8)?, "square root of 1 - x is 2-integral");
    Ok(())
}

fn phi_homomorphism(config: &Config) -> CheckResult {
    let mut r = rng(config, 15);
    let p6 = full(6);
    for spec in [FrobeniusLiftSpec::identity(), FrobeniusLiftSpec::power_substitution()] {
        let a = spec.ring().clone();
        for _ in 0..config.trials {
            let (s, t) = (a.sample(&mut r), a.sample(&mut r));
            let (ps, pt) = (phi(&spec, &s, &p6)?, phi(&spec, &t, &p6)?);
            ensure!(phi(&spec, &s.add(&t), &p6)? == ps.add(&pt)?, "phi not additive: {s}, {t}");
            ensure!(phi(&spec, &s.mul(&t), &p6)? == ps.mul(&pt)?, "phi not multiplicative: {s}, {t}");
            for (i, g) in ps.ghost().components().iter().enumerate() {
                ensure!(*g == spec.sigma(i as u64 + 1, &s)?, "ghost {} of phi({s})", i + 1);
            }
        }
    }
    Ok(())
}

fn delta_identities(config: &Config) -> CheckResult {
    let mut r = rng(config, 16);
    let z = ring("int");
    for a in 1..=3u64 {
        for b in 1..=3u64 {
            if a * b > 6 {
                continue;
            }
            for _ in 0..config.trials {
                let x = WittVector::sample(&full(a * b), &z, &mut r);
                let d = delta(&x, a, b)?;
                for n in 1..=a {
                    let fx = x.frobenius(n)?.project(&full(b))?;
                    ensure!(d.outer_ghost(n)? == fx, "outer ghost {n} of delta({a},{b}) x = {x}");
                }
                for m in 1..=b {
                    let fx = x.frobenius(m)?.project(&full(a))?;
                    ensure!(d.map_inner_ghost(m)? == fx, "W(w_{m}) of delta({a},{b}) x = {x}");
                    for n in 1..=a {
                        let lhs = d.map_inner_ghost(m)?.ghost().component(n).unwrap().clone();
                        let rhs = d.outer_ghost(n)?.ghost().component(m).unwrap().clone();
                        ensure!(lhs == rhs, "exchange relation at ({n},{m}) for x = {x}");
                    }
                }
            }
        }
    }
    Ok(())
}

fn padic_teichmuller(config: &Config) -> CheckResult {
    let mut r = rng(config, 17);
    ensure!(teichmuller_digit(5, 2, 3)?.value() == &BigInt::from(57), "tau(2) mod 125");
    for _ in 0..config.trials {
        let p = [2u64, 3, 5, 7][r.gen_range(0..4)];
        let k = r.gen_range(1..7);
        let (a, b) = (r.gen_range(0..p), r.gen_range(0..p));
        let (ta, tb) = (teichmuller_digit(p, a, k)?, teichmuller_digit(p, b, k)?);
        ensure!(ta.pow(p) == ta, "tau({a})^{p} != tau({a}) mod {p}^{k}");
        ensure!(ta.value() % p == BigInt::from(a), "tau({a}) does not reduce to {a}");
        ensure!(ta.mul(&tb) == teichmuller_digit(p, a * b % p, k)?, "tau not multiplicative");
    }
    Ok(())
}

fn padic_oracle(config: &Config) -> CheckResult {
    for (p, len) in [(2u64, 3u32), (3, 2), (2, 2), (5, 1)] {
        let report = oracle_check(p, len, 0, true, config.seed)?;
        ensure!(report.passed, "exhaustive oracle p = {p}, L = {len}: {:?}", report.counterexample);
    }
    for (p, len) in [(2u64, 4u32), (3, 3), (5, 3)] {
        let report = oracle_check(p, len, 5 * config.trials as u64, false, config.seed)?;
        ensure!(report.passed, "oracle p = {p}, L = {len}: {:?}", report.counterexample);
    }
    Ok(())
}

fn padic_frobenius(config: &Config) -> CheckResult {
    let mut r = rng(config, 18);
    for p in [2u64, 3, 5] {
        let a = ring(&format!("gf:{p}"));
        let prof = Profile::p_typical(p, 3)?;
        let short = Profile::p_typical(p, 2)?;
        for _ in 0..config.trials / 4 + 1 {
            let x = WittVector::sample(&prof, &a, &mut r);
            ensure!(
                witt_to_padic(&x.frobenius(p)?)? == witt_to_padic(&x.project(&short)?)?,
                "F_{p} on digits: x = {x}"
            );
        }
    }
    Ok(())
}
