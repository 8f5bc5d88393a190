use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use frobrig_core::padic::teichmuller;
use frobrig_core::witt::{artin_hasse_rational, dwork_theta, exp_rational, ghost, relative_artin_hasse_rational, WittCoords};
use frobrig_core::{PAdic, PadicSeries};
use proptest::prelude::*;

fn mul_trunc(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().min(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_log_roundtrip(p in prop::sample::select(vec![3u32, 5, 7]), coeffs in prop::collection::vec(-20i64..20, 1..6)) {
        // f with lowest order ≥ 1 and coefficients divisible by p so exp converges nicely
        let cs: Vec<PAdic> = std::iter::once(PAdic::zero(p))
            .chain(coeffs.iter().map(|&c| PAdic::from_int(p, c * p as i64)))
            .collect();
        let f = PadicSeries::polynomial(p, "x", cs).truncate(25);
        let back = f.exp(60).unwrap().log(60).unwrap();
        prop_assert!(back.indistinguishable_from(&f, 25).unwrap());
    }

    #[test]
    fn ghost_vectors_add_under_products(
        p in prop::sample::select(vec![2u32, 3, 5]),
        l in prop::collection::vec(-5i64..5, 1..3),
        m in prop::collection::vec(-5i64..5, 1..3),
    ) {
        let trunc = 40;
        let (lam, mu) = (WittCoords::new(p, l), WittCoords::new(p, m));
        let prod = mul_trunc(&relative_artin_hasse_rational(&lam, trunc), &relative_artin_hasse_rational(&mu, trunc));
        let mut f = vec![BigRational::zero(); trunc];
        let (mut n, mut pn) = (0usize, 1usize);
        while pn < trunc {
            let w = ghost(&lam, n) + ghost(&mu, n);
            f[pn] = BigRational::new(w, BigInt::from(pn));
            n += 1;
            pn *= p as usize;
        }
        prop_assert_eq!(prod, exp_rational(&f, trunc));
    }
}

#[test]
fn artin_hasse_integral_to_200() {
    for p in [2u32, 3, 5, 7] {
        let e = artin_hasse_rational(p, 201);
        assert!(e[0].is_one());
        for (k, c) in e.iter().enumerate() {
            assert!(!c.denom().is_multiple_of(&BigInt::from(p)), "p = {p}, T^{k}");
        }
    }
}

#[test]
fn dwork_partial_sums_stabilize() {
    let p = 5;
    let theta = dwork_theta(p, 400, 40).unwrap();
    // tail bound min_{k > N} v(c_k), capped at the working precision
    let tail = |n: usize| (n as i64 + 1..400).filter_map(|k| theta.coeff(k).and_then(|c| c.val_pi_lower())).min().unwrap().min(40);
    for a in 1..p as u64 {
        let s = theta.partial_sums(&teichmuller(p, a, 40), 40).unwrap();
        let gap = |n: usize| s[s.len() - 1].sub(&s[n]).val_pi_lower().unwrap_or(i64::MAX);
        for n in [10, 25, 50, 75, 100, 200] {
            assert!(gap(n) >= tail(n), "a = {a}, N = {n}: {} < {}", gap(n), tail(n));
        }
        assert!(gap(25) < gap(50) && gap(100) >= 40);
    }
}
