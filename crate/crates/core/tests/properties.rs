use proptest::prelude::*;

use wittring::lambda::{lambda_to_witt, witt_to_lambda};
use wittring::profiles::divisors;
use wittring::{CommRing, GhostVector, Profile, RingDescriptor, RingElement, WittVector};

fn ints(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..=20, len)
}

fn vector(ring: &RingDescriptor, profile: &Profile, values: &[i64]) -> WittVector {
    WittVector::from_fn(profile, ring, |n| ring.int_image(values[profile.position(n).unwrap()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_divisor_stable(indices in prop::collection::vec(1u64..=60, 1..6)) {
        let p = Profile::closure(&indices).unwrap();
        for &n in p.indices() {
            for d in divisors(n) {
                prop_assert!(p.contains(d));
            }
        }
        prop_assert_eq!(Profile::validate(p.indices()).unwrap(), p.clone());
        let text = p.to_string();
        prop_assert_eq!(text.parse::<Profile>().unwrap(), p);
    }

    #[test]
    fn residues_round_trip(m in 2u64..50, a in -1000i64..1000) {
        let ring = RingDescriptor::integers_mod(m).unwrap();
        let e = ring.int_image(a);
        prop_assert_eq!(e.to_residue(), Some(a.rem_euclid(m as i64) as u64));
        prop_assert_eq!(RingElement::parse(&ring, &e.to_string()).unwrap(), e);
    }

    #[test]
    fn vector_text_round_trips(values in ints(6)) {
        let ring = RingDescriptor::polynomial(RingDescriptor::integers_mod(9).unwrap(), "u").unwrap();
        let p = Profile::full(3).unwrap();
        let v = WittVector::from_fn(&p, &ring, |n| {
            let i = 2 * (n as usize - 1);
            let c = [ring.int_image(values[i]), ring.int_image(values[i + 1]).mul(&ring.generator().unwrap())];
            c[0].add(&c[1])
        });
        prop_assert_eq!(WittVector::parse(&p, &ring, &v.to_string()).unwrap(), v);
    }

    #[test]
    fn ghost_round_trip_over_rationals(values in ints(6)) {
        let ring = RingDescriptor::rationals();
        let p = Profile::full(6).unwrap();
        let x = vector(&ring, &p, &values);
        let g = GhostVector::parse(&p, &ring, &x.ghost().to_string()).unwrap();
        prop_assert_eq!(g.unghost().unwrap(), x);
    }

    #[test]
    fn addition_and_negation_over_residues(a in ints(6), b in ints(6), m in 2u64..13) {
        let ring = RingDescriptor::integers_mod(m).unwrap();
        let p = Profile::full(6).unwrap();
        let (x, y) = (vector(&ring, &p, &a), vector(&ring, &p, &b));
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x.clone());
        prop_assert!(x.add(&x.neg().unwrap()).unwrap().is_zero());
        // reduction Z -> Z/m commutes with the ring laws
        let z = RingDescriptor::integers();
        let (xz, yz) = (vector(&z, &p, &a), vector(&z, &p, &b));
        let reduce = |w: &WittVector| {
            WittVector::from_fn(&p, &ring, |n| {
                let r = w.component(n).unwrap().to_rational().unwrap();
                ring.rational_image(&r).unwrap()
            })
        };
        prop_assert_eq!(reduce(&xz.mul(&yz).unwrap()), x.mul(&y).unwrap());
    }

    #[test]
    fn series_model_round_trip(values in ints(8)) {
        let ring = RingDescriptor::integers_mod(6).unwrap();
        let p = Profile::full(8).unwrap();
        let x = vector(&ring, &p, &values);
        prop_assert_eq!(lambda_to_witt(&witt_to_lambda(&x).unwrap()).unwrap(), x);
    }
}
