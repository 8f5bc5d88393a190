use frobrig_core::charsum::{airy_sum, kloosterman, psi_sum, CycloVector, Domain, Term};
use frobrig_core::ffield::pow_mod;
use proptest::prelude::*;

fn cyclo(p: u32) -> impl Strategy<Value = CycloVector> {
    prop::collection::vec(-6i64..6, p as usize).prop_map(move |counts| CycloVector { p, counts })
}

#[test]
fn kloosterman_galois_stability_p5() {
    for n in [2u32, 3] {
        for a in 1..5u32 {
            let k = kloosterman(n, 5, a).unwrap();
            for c in 1..5u32 {
                let ca = (pow_mod(c as u64, n as u64, 5) * a as u64 % 5) as u32;
                assert_eq!(k.galois(c), kloosterman(n, 5, ca).unwrap(), "n = {n}, a = {a}, c = {c}");
            }
        }
    }
}

#[test]
fn kloosterman_counts_points() {
    // Σ_j counts[j] = ♯{x_1⋯x_n = a} = (p − 1)^{n−1}
    for p in [3u32, 5, 7] {
        for n in [2u32, 3] {
            for a in 1..p {
                let k = kloosterman(n, p, a).unwrap();
                assert_eq!(k.counts.iter().sum::<i64>(), (p as i64 - 1).pow(n - 1));
            }
        }
    }
}

#[test]
fn airy_sums_have_p_terms() {
    for p in [5u32, 7] {
        for a in 0..p {
            assert_eq!(airy_sum(2, p, a).unwrap().counts.iter().sum::<i64>(), p as i64);
        }
    }
}

proptest! {
    #[test]
    fn galois_stability(p in prop::sample::select(vec![3u32, 5, 7]), n in 2u32..4, a in 1u32..7, c in 1u32..7) {
        let (a, c) = (1 + a % (p - 1), 1 + c % (p - 1));
        let ca = (pow_mod(c as u64, n as u64, p as u64) * a as u64 % p as u64) as u32;
        prop_assert!(kloosterman(n, p, a).unwrap().galois(c).same_value(&kloosterman(n, p, ca).unwrap()));
    }

    #[test]
    fn embedding_is_multiplicative((u, v) in prop::sample::select(vec![3u32, 5, 7]).prop_flat_map(|p| (cyclo(p), cyclo(p)))) {
        let lhs = u.mul(&v).embed(40);
        let rhs = u.embed(40).mul(&v.embed(40));
        prop_assert!(lhs.agrees_mod(&rhs, 36));
        prop_assert!(u.add(&v).embed(40).agrees_mod(&u.embed(40).add(&v.embed(40)), 36));
    }

    #[test]
    fn affine_sums_vanish(p in prop::sample::select(vec![3u32, 5, 7, 11]), c1 in 1i64..50, c0 in -50i64..50) {
        prop_assume!(c1 % p as i64 != 0);
        let f = [Term::new(c1, 1, 1), Term::new(c0, 1, 0)];
        let s = psi_sum(p, &f, Domain::All).unwrap();
        prop_assert!(s.same_value(&CycloVector::zero(p)));
    }
}
