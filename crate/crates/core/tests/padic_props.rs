use frobrig_core::acceptance::ultrametric_holds;
use frobrig_core::padic::{teichmuller, zeta_p};
use frobrig_core::{Comparison, PAdic};
use proptest::prelude::*;

fn primes() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn padic(p: u32) -> impl Strategy<Value = PAdic> {
    let inexact = (-4i64..6, prop::collection::vec(0..p, 1..12), 0i64..30).prop_map(move |(shift, digits, extra)| {
        let len = digits.len() as i64;
        PAdic::from_digits(p, shift, &digits, Some(len + extra))
    });
    let int = (-10_000i64..10_000).prop_map(move |n| PAdic::from_int(p, n));
    prop_oneof![3 => inexact, 1 => int, 1 => Just(PAdic::zero(p))]
}

fn pair() -> impl Strategy<Value = (PAdic, PAdic)> {
    primes().prop_flat_map(|p| (padic(p), padic(p)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ultrametric((x, y) in pair()) {
        prop_assert!(ultrametric_holds(&x, &y), "x = {x}, y = {y}");
    }
}

proptest! {
    #[test]
    fn sum_and_difference_cancel((x, y) in pair()) {
        let back = x.add(&y).sub(&y);
        prop_assert!(back.compare(&x) != Comparison::Unequal);
    }

    #[test]
    fn multiplication_commutes((x, y) in pair()) {
        prop_assert!(x.mul(&y).compare(&y.mul(&x)) != Comparison::Unequal);
    }

    #[test]
    fn record_roundtrip(x in primes().prop_flat_map(padic)) {
        let back = PAdic::from_record(&x.to_record()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn renormalization_is_idempotent(x in primes().prop_flat_map(padic)) {
        // multiplying by the exact 1 re-runs normalization
        let once = x.mul(&PAdic::one(x.p()));
        prop_assert_eq!(once.mul(&PAdic::one(x.p())), once.clone());
        prop_assert!(once.compare(&x) != Comparison::Unequal);
    }

    #[test]
    fn teichmuller_is_fixed_by_frobenius(p in primes(), a in 0u64..7) {
        let t = teichmuller(p, a % p as u64, 40);
        prop_assert!(t.pow(p as u64).agrees_mod(&t, 40));
        prop_assert_eq!(t.residue(), Some((a % p as u64) as u32));
    }
}

#[test]
fn teichmuller_multiplicative_all_pairs() {
    for p in [2u32, 3, 5, 7] {
        let t: Vec<PAdic> = (0..p as u64).map(|a| teichmuller(p, a, 60)).collect();
        for a in 0..p as usize {
            for b in 0..p as usize {
                assert!(t[a].mul(&t[b]).agrees_mod(&t[a * b % p as usize], 60), "p = {p}, a = {a}, b = {b}");
            }
        }
    }
}

#[test]
fn ring_relation_is_zero() {
    for p in [2u32, 3, 5, 7, 11] {
        let r = PAdic::pi(p).pow(p as u64 - 1).add(&PAdic::from_int(p, p as i64));
        assert!(r.is_exact_zero(), "p = {p}");
    }
}

#[test]
fn teichmuller_roots_of_unity_polynomial() {
    for p in [3u32, 5, 7] {
        // Π (X − [a]) built coefficient by coefficient
        let mut poly = vec![PAdic::one(p)];
        for a in 1..p as u64 {
            let t = teichmuller(p, a, 40).neg();
            let mut next = vec![PAdic::zero(p); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = next[i + 1].add(c);
                next[i] = next[i].add(&c.mul(&t));
            }
            poly = next;
        }
        let deg = p as usize - 1;
        for (i, c) in poly.iter().enumerate() {
            let want = match i {
                0 => PAdic::from_int(p, -1),
                i if i == deg => PAdic::one(p),
                _ => PAdic::zero(p),
            };
            assert!(c.agrees_mod(&want, 36), "p = {p}, X^{i}");
        }
    }
}

#[test]
fn zeta_powers_sum_to_zero() {
    for p in [3u32, 5, 7] {
        let z = zeta_p(p, 40);
        let s = (0..p as u64).fold(PAdic::zero(p), |acc, j| acc.add(&z.pow(j)));
        assert!(s.agrees_mod(&PAdic::zero(p), 36), "p = {p}");
    }
}
