use frobrig_core::connection::{airy_connection, theta_connection, Form, MatrixConnection};
use frobrig_core::frobenius::{frame_family, solve_formal, trace_teichmuller};
use frobrig_core::matrix::{MatSeries, Matrix};
use frobrig_core::witt::dwork_theta;
use frobrig_core::{PAdic, PadicSeries};
use proptest::prelude::*;

const T: i64 = 24;

fn gauge_series(p: u32, n: usize, ints: &[i64]) -> (MatSeries, MatSeries) {
    let mut coeffs = vec![Matrix::identity(p, n)];
    for chunk in ints.chunks(n * n) {
        coeffs.push(Matrix::from_fn(p, n, n, |i, j| PAdic::from_int(p, chunk[(i * n + j) % chunk.len()])));
    }
    let g = MatSeries::new(p, n, 0, coeffs, T);
    let gi = g.inverse(40).unwrap();
    (g, gi)
}

fn dwork_conn(p: u32) -> MatrixConnection {
    MatrixConnection::polynomial(Form::Dx, "x", vec![Matrix::scalar(&PAdic::pi(p).neg(), 1)])
}

fn scalar_series(s: &PadicSeries, trunc: i64) -> MatSeries {
    MatSeries::from_entries(s.p(), &[vec![s.clone()]], trunc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gauge_is_a_group_action(
        which in 0usize..3,
        g_ints in prop::collection::vec(-4i64..=4, 4..13),
        h_ints in prop::collection::vec(-4i64..=4, 4..13),
    ) {
        let conn = match which {
            0 => theta_connection(2, &PAdic::pi(5)).unwrap(),
            1 => theta_connection(3, &PAdic::from_int(7, 2)).unwrap(),
            _ => airy_connection(2, &PAdic::pi(7), None).unwrap(),
        };
        let (p, n) = (conn.p(), conn.size);
        let (g, gi) = gauge_series(p, n, &g_ints);
        let (h, hi) = gauge_series(p, n, &h_ints);
        let lhs = conn.gauge(&h, &hi).unwrap().gauge(&g, &gi).unwrap();
        let rhs = conn.gauge(&g.mul(&h), &hi.mul(&gi)).unwrap();
        let d = lhs.a.sub(&rhs.a);
        prop_assert!(d.trunc >= T - 1 && d.vanishes_below(d.trunc));
    }

    #[test]
    fn pullback_is_multiplicative(j in 1i64..4, k in 1i64..4, airy in any::<bool>()) {
        let c = if airy { airy_connection(2, &PAdic::pi(7), None).unwrap() } else { theta_connection(2, &PAdic::pi(5)).unwrap() };
        let twice = c.pullback_power(j, "s").unwrap().pullback_power(k, "t").unwrap();
        prop_assert_eq!(twice.a, c.pullback_power(j * k, "t").unwrap().a);
    }

    #[test]
    fn residual_is_gauge_covariant(c1 in -6i64..6, c2 in -6i64..6, bump in -3i64..3) {
        let p = 5;
        let trunc = 60;
        let conn = dwork_conn(p);
        // φ = θ·(1 + bump·x) has residual R; gauge by g = 1 + c1 x + c2 x²
        let phi = dwork_theta(p, trunc as usize, 60).unwrap()
            .mul(&PadicSeries::polynomial(p, "x", vec![PAdic::one(p), PAdic::from_int(p, bump)])).unwrap()
            .truncate(trunc);
        let g = PadicSeries::polynomial(p, "x", vec![PAdic::one(p), PAdic::from_int(p, c1), PAdic::from_int(p, c2)]).truncate(trunc);
        let g_inv = g.inverse(60).unwrap();
        let gp = g.compose_x_to_k(p as i64).unwrap().truncate(trunc);
        let conn2 = conn.gauge(&scalar_series(&g, trunc), &scalar_series(&g_inv, trunc)).unwrap();
        // φ' = g(x^p) φ g(x)⁻¹
        let phi2 = gp.mul(&phi).unwrap().mul(&g_inv).unwrap().truncate(trunc);
        let r = conn.frobenius_residual(&scalar_series(&phi, trunc), &scalar_series(&phi.inverse(60).unwrap(), trunc)).unwrap();
        let r2 = conn2.frobenius_residual(&scalar_series(&phi2, trunc), &scalar_series(&phi2.inverse(60).unwrap(), trunc)).unwrap();
        let upto = r.trunc.min(r2.trunc);
        prop_assert!(upto >= trunc - p as i64);
        prop_assert!(r2.sub(&r).truncate(upto).vanishes_below(upto));
        if bump == 0 {
            prop_assert!(r2.vanishes_below(upto));
        }
    }
}

#[test]
fn solve_formal_residual_contract() {
    let cases = [
        (theta_connection(2, &PAdic::pi(5)).unwrap(), 40),
        (theta_connection(3, &PAdic::pi(7)).unwrap(), 30),
        (airy_connection(2, &PAdic::pi(7), None).unwrap(), 40),
    ];
    for (conn, t) in cases {
        let frame = match conn.form {
            Form::Dlog => frame_family(&conn).unwrap().base,
            Form::Dx => Matrix::identity(conn.p(), conn.size),
        };
        let sol = solve_formal(&conn, &frame, t, 60).unwrap();
        let r = conn.frobenius_residual(&sol.phi, &sol.phi.inverse(60).unwrap()).unwrap();
        assert!(r.trunc >= t - 2, "trunc {}", r.trunc);
        assert!(r.vanishes_below(r.trunc));
    }
}

#[test]
fn frame_covariance_rank1() {
    let p = 5;
    let conn = dwork_conn(p);
    let base = solve_formal(&conn, &Matrix::identity(p, 1), 80, 60).unwrap();
    for n in [5i64, 10, 20] {
        let z = PAdic::one(p).add(&PAdic::pi(p).pow(n as u64).mul_int(3));
        let moved = solve_formal(&conn, &Matrix::scalar(&z, 1), 80, 60).unwrap();
        let agree = (0..80)
            .filter_map(|k| moved.phi.coeff(k).get(0, 0).sub(base.phi.coeff(k).get(0, 0)).val_pi_lower())
            .min()
            .unwrap();
        assert!(agree >= n - (p as i64 - 1) * moved.loss.max(base.loss), "N = {n}: {agree}");
    }
}

#[test]
fn dwork_trace_digits_grow_linearly() {
    let p = 5;
    let conn = dwork_conn(p);
    let digits: Vec<(i64, i64)> = [60i64, 120, 240]
        .iter()
        .map(|&t| {
            let sol = solve_formal(&conn, &Matrix::identity(p, 1), t, 200).unwrap();
            (t, trace_teichmuller(&sol, 1, 1, 200).unwrap().stable_digits)
        })
        .collect();
    for w in digits.windows(2) {
        let slope = (w[1].1 - w[0].1) as f64 / (w[1].0 - w[0].0) as f64;
        assert!(slope >= (p as f64 - 1.0) / (p * p) as f64, "{digits:?}");
    }
}

#[test]
fn connection_json_roundtrip() {
    for conn in [theta_connection(3, &PAdic::pi(7)).unwrap(), airy_connection(2, &PAdic::from_int(5, 3), None).unwrap()] {
        let s = serde_json::to_string(&conn).unwrap();
        let back: MatrixConnection = serde_json::from_str(&s).unwrap();
        assert_eq!(back, conn);
    }
}
