use num_rational::Ratio;
use frobrig_core::lie::{center_count_zq, lookup, stable_spectrum, tables};
use frobrig_core::robba::RankOneModule;
use frobrig_core::slopes::{annulus_radius_profile, isoclinic_slope_multiset, SlopeCase};
use frobrig_core::PAdic;
use proptest::prelude::*;

#[test]
fn roots_equal_rank_times_coxeter() {
    for row in tables() {
        assert_eq!(row.roots, row.rank * row.coxeter, "{}", row.name);
    }
}

#[test]
fn center_counts_divide_center_order() {
    for row in tables() {
        for q in [5u64, 7, 11, 13, 25, 49] {
            let z = center_count_zq(&row.name, q).unwrap();
            assert_eq!(row.center_order as u64 % z, 0, "{} q = {q}", row.name);
        }
    }
}

#[test]
fn e6_differential_group_is_f4() {
    assert_eq!(lookup("E6").unwrap().g_diff, "F4");
}

#[test]
fn swan_and_irregularity_formulas() {
    for row in tables() {
        let th = isoclinic_slope_multiset(SlopeCase::Theta { m: None }, &row.name).unwrap();
        assert_eq!(th.conductor, Ratio::new(row.roots as i64, row.coxeter as i64));
        assert_eq!(th.conductor, Ratio::from_integer(row.rank as i64));
        let ai = isoclinic_slope_multiset(SlopeCase::Airy, &row.name).unwrap();
        assert_eq!(ai.conductor, Ratio::from_integer((row.rank * (row.coxeter + 1)) as i64));
        for rep in [th, ai] {
            assert_eq!(rep.multiset.rank(), row.roots + row.rank);
            assert!(rep.conductor.is_integer());
        }
    }
}

#[test]
fn theta_with_regular_elliptic_order() {
    // E8 has a regular elliptic element of order 15: slopes 1/15, Swan 240/15
    let rep = isoclinic_slope_multiset(SlopeCase::Theta { m: Some(15) }, "E8").unwrap();
    assert_eq!(rep.nu, Ratio::new(1, 15));
    assert_eq!(rep.conductor, Ratio::from_integer(16));
}

proptest! {
    #[test]
    fn spectrum_symmetries(n in 2usize..6, c in 1i64..20) {
        prop_assume!(c % 11 != 0);
        let s = stable_spectrum(n, &PAdic::from_int(11, c), 30).unwrap();
        prop_assert_eq!(s.zeros, n - 1);
        prop_assert_eq!(s.roots.len(), n * (n - 1));
        let mut neg = s.negated();
        let mut roots = s.roots.clone();
        neg.sort();
        roots.sort();
        prop_assert_eq!(neg, roots);
        if let Some(num) = &s.numeric {
            let total = num.iter().fold(PAdic::zero(11), |a, x| a.add(x));
            prop_assert!(total.agrees_mod(&PAdic::zero(11), 25));
            // ad_X is invertible on its image: every nonzero eigenvalue is a unit
            prop_assert!(num.iter().filter(|x| !x.is_zero()).all(|x| x.val_pi() == Some(0)));
        }
    }

    #[test]
    fn scaling_by_p_trivializes(p in prop::sample::select(vec![3u32, 5, 7]), units in prop::collection::vec(1i64..30, 1..5)) {
        let a: Vec<PAdic> = units
            .iter()
            .enumerate()
            .map(|(i, &u)| if (i + 1) % p as usize == 0 || u % p as i64 == 0 { PAdic::zero(p) } else { PAdic::pi(p).mul_int(u) })
            .collect();
        prop_assume!(!a.last().unwrap().is_zero());
        let m = RankOneModule::new(p, a.clone()).unwrap();
        let scaled = RankOneModule::new(p, a.iter().map(|c| c.mul_int(p as i64)).collect()).unwrap();
        prop_assert_eq!(m.irregularity().unwrap(), m.d());
        prop_assert_eq!(scaled.irregularity().unwrap(), 0);
        for rho in [0.3, 0.6, 0.9, 0.99] {
            prop_assert!(scaled.generic_radius(rho) >= m.generic_radius(rho));
        }
    }

    #[test]
    fn minus_log_radius_convex(p in prop::sample::select(vec![3u32, 5, 7]), vals in prop::collection::vec(1u64..4, 1..6)) {
        let a: Vec<PAdic> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| if (i + 1) % p as usize == 0 { PAdic::zero(p) } else { PAdic::pi(p).pow(v) })
            .collect();
        prop_assume!(!a.last().unwrap().is_zero());
        let m = RankOneModule::new(p, a).unwrap();
        let grid: Vec<f64> = (0..20).map(|i| 0.05 + 0.25 * i as f64).collect();
        prop_assert!(frobrig_core::acceptance::radius_convex(&m, &grid));
    }
}

#[test]
fn bessel_annulus_radii() {
    let p = 5;
    let eig = [PAdic::zero(p), PAdic::from_int(p, 2), PAdic::from_int(p, -2)];
    let grid: Vec<f64> = (0..20).map(|i| 0.2 + 0.04 * i as f64).collect();
    let prof = annulus_radius_profile(&eig, &PAdic::pi(p).mul_int(4), &grid).unwrap();
    assert!(prof.ok());
    let mut ex: Vec<f64> = prof.exponents.iter().map(|e| e.unwrap()).collect();
    ex.sort_by(f64::total_cmp);
    assert!((ex[0] - 1.0).abs() < 1e-9 && (ex[1] - 2.0).abs() < 1e-9 && (ex[2] - 2.0).abs() < 1e-9);
}
