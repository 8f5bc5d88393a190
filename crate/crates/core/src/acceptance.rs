//! The ten acceptance criteria, each producing one PASS/FAIL record with the
//! measured values and the tolerance it was judged against.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::canonical::{build_y, convergence_diagnostic, reduce_to_canonical, CanonicalCase};
use crate::charsum::kloosterman;
use crate::connection::{theta_connection, MatrixConnection};
use crate::error::{Error, Result};
use crate::ffield::pow_mod;
use crate::frobenius::{default_twists, fit_integral_frame, normalize_to_oracle, solve_formal, trace_teichmuller};
use crate::lie::lookup;
use crate::matrix::{MatSeries, Matrix};
use crate::padic::{teichmuller, zeta_p, PAdic};
use crate::robba::RankOneModule;
use crate::slopes::{isoclinic_slope_multiset, SlopeCase};
use crate::wild::{class_count, hom_count};
use crate::witt::{artin_hasse_rational, dwork_theta, theta_d_ratio, WittCoords};

pub const DEFAULT_SEED: u64 = 0x5eed_f00d;

/// Fit objective the flagship frame must reach at depth 130.
pub const FLAGSHIP_OBJECTIVE_THRESHOLD: i64 = -11;
/// Golden flagship values: `b = 2π⁴ + π¹² = −135`, twist `−1/p`.
pub const FLAGSHIP_B: i64 = -135;
pub const FLAGSHIP_TWIST: &str = "-1/p";
pub const FLAGSHIP_MODULUS: i64 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct FlagshipParams {
    pub depth: i64,
    pub budget: usize,
    pub trunc: i64,
    pub prec: i64,
}

impl Default for FlagshipParams {
    fn default() -> Self {
        FlagshipParams { depth: 130, budget: 16, trunc: 300, prec: 120 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub flagship: FlagshipParams,
    /// Working precision of the canonical reduction (`Y` is built with 200 more digits).
    pub canonical_prec: i64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { seed: DEFAULT_SEED, flagship: FlagshipParams::default(), canonical_prec: 300 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub tolerance: String,
    pub measured: Value,
    #[serde(skip)]
    pub elapsed_ms: u128,
    pub error: Option<String>,
    /// The failure came from running out of precision.
    pub precision_shortfall: bool,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<28} tol: {:<36} {} ms",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.tolerance,
            self.elapsed_ms
        )?;
        if let Some(e) = &self.error {
            write!(f, "  error: {e}")?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "dwork-trace-identity"),
    (2, "frobenius-residual-rank1"),
    (3, "slope-swan-tables"),
    (4, "rank1-classification"),
    (5, "pulita-identity"),
    (6, "artin-hasse-integrality"),
    (7, "wild-parameter-counts"),
    (8, "canonical-reduction"),
    (9, "flagship-kloosterman"),
    (10, "property-suites"),
];

type Outcome = Result<(bool, Value)>;
type Check = Box<dyn Fn(&AcceptanceConfig) -> Outcome>;

pub fn run_criterion(id: u32, cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let (name, tolerance, f): (&'static str, String, Check) = match id {
        1 => (CRITERIA[0].1, "mod π^30 (p=5, trunc 400, prec 40)".into(), Box::new(|_| c1_dwork_trace())),
        2 => (CRITERIA[1].1, "exact through x^100".into(), Box::new(|_| c2_residual())),
        3 => (CRITERIA[2].1, "exact integer equality".into(), Box::new(|_| c3_slopes())),
        4 => (CRITERIA[3].1, "exact agreement, 50 modules".into(), Box::new(|c| c4_rank1(c.seed))),
        5 => (CRITERIA[4].1, "exact through degree 200".into(), Box::new(|_| c5_pulita())),
        6 => (CRITERIA[5].1, "v ≥ 0 through T^200".into(), Box::new(|_| c6_artin_hasse())),
        7 => (CRITERIA[6].1, "exact".into(), Box::new(|_| c7_wild())),
        8 => (CRITERIA[7].1, "O(s^80), slope ≥ -1/8, Q_1 mod π^40".into(), Box::new(c8_canonical)),
        9 => (
            CRITERIA[8].1,
            format!("objective ≥ {FLAGSHIP_OBJECTIVE_THRESHOLD}, traces mod π^{FLAGSHIP_MODULUS}"),
            Box::new(|c| c9_flagship(&c.flagship)),
        ),
        10 => (CRITERIA[9].1, "exact / three-valued clean".into(), Box::new(|c| c10_properties(c.seed))),
        _ => return Err(Error::InvalidInput(format!("no criterion {id}"))),
    };
    let t0 = Instant::now();
    let out = f(cfg);
    let elapsed_ms = t0.elapsed().as_millis();
    Ok(match out {
        Ok((pass, measured)) => CriterionResult { id, name, pass, tolerance, measured, elapsed_ms, error: None, precision_shortfall: false },
        Err(e) => {
            let precision_shortfall = matches!(e, Error::InsufficientPrecision(_) | Error::ConvergenceShortfall(_));
            CriterionResult { id, name, pass: false, tolerance, measured: Value::Null, elapsed_ms, error: Some(e.to_string()), precision_shortfall }
        }
    })
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, cfg).expect("known criterion")).collect()
}

fn c1_dwork_trace() -> Outcome {
    let p = 5;
    let theta = dwork_theta(p, 400, 40)?;
    let z = zeta_p(p, 40);
    let mut digits = Vec::new();
    let mut pass = true;
    for a in 0..p as u64 {
        let x = teichmuller(p, a, 40);
        let val = theta.partial_sums(&x, 40)?.pop().unwrap_or_else(|| PAdic::zero(p));
        let target = z.pow(a);
        pass &= val.agrees_mod(&target, 30);
        digits.push(val.sub(&target).val_pi_lower());
    }
    Ok((pass, json!({ "difference_valuations": digits })))
}

fn c2_residual() -> Outcome {
    let p = 5;
    let conn = MatrixConnection::polynomial(crate::connection::Form::Dx, "x", vec![Matrix::scalar(&PAdic::pi(p).neg(), 1)]);
    let th = dwork_theta(p, 102, 60)?;
    let phi = MatSeries::from_entries(p, &[vec![th.clone()]], 102);
    let phi_inv = MatSeries::from_entries(p, &[vec![th.inverse(60)?]], 102);
    let r = conn.frobenius_residual(&phi, &phi_inv)?;
    let nonzero: Vec<i64> = (0..=100.min(r.trunc - 1)).filter(|&k| !r.coeff(k).is_zero()).collect();
    Ok((r.trunc > 100 && nonzero.is_empty(), json!({ "residual_trunc": r.trunc, "nonzero_orders": nonzero })))
}

fn c3_slopes() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for t in ["A1", "A2", "A3", "G2", "E8"] {
        let row = lookup(t)?;
        let th = isoclinic_slope_multiset(SlopeCase::Theta { m: None }, t)?;
        let ai = isoclinic_slope_multiset(SlopeCase::Airy, t)?;
        let swan = Ratio::new(row.roots as i64, row.coxeter as i64);
        let irr = Ratio::from_integer(row.rank as i64 * (row.coxeter as i64 + 1));
        let ok = th.conductor == swan && swan.is_integer() && ai.conductor == irr;
        pass &= ok;
        rows.push(json!({ "type": t, "swan": th.conductor.to_string(), "expected_swan": swan.to_string(),
            "irr": ai.conductor.to_string(), "expected_irr": irr.to_string(), "ok": ok }));
    }
    Ok((pass, Value::Array(rows)))
}

/// Random solvable rank-one module with `p ∤ j` for every nonzero `a_j`.
pub fn random_rank1(rng: &mut impl Rng) -> Result<RankOneModule> {
    let p = [3u32, 5, 7][rng.gen_range(0..3)];
    let mut d = rng.gen_range(1..=8usize);
    if d % p as usize == 0 {
        d -= 1;
    }
    let a = (1..=d)
        .map(|j| {
            if j % p as usize == 0 || (j < d && rng.gen_bool(0.3)) {
                return PAdic::zero(p);
            }
            let v = rng.gen_range(1..=3i64);
            let mut u = rng.gen_range(1..(p as i64 * p as i64));
            if u % p as i64 == 0 {
                u += 1;
            }
            PAdic::pi(p).pow(v as u64).mul_int(u)
        })
        .collect();
    RankOneModule::new(p, a)
}

/// `count` modules from [`random_rank1`] seeded by `seed`.
pub fn random_rank1_modules(seed: u64, count: usize) -> Result<Vec<RankOneModule>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_rank1(&mut rng)).collect()
}

fn c4_rank1(seed: u64) -> Outcome {
    let mut disagreements = Vec::new();
    let mut histogram: BTreeMap<usize, u32> = BTreeMap::new();
    for (i, m) in random_rank1_modules(seed, 50)?.into_iter().enumerate() {
        let irr = m.irregularity()?;
        let oracle = m.irregularity_by_radius();
        *histogram.entry(irr).or_default() += 1;
        if irr != oracle {
            disagreements.push(json!({ "instance": i, "p": m.p(), "d": m.d(), "irr": irr, "oracle": oracle }));
        }
    }
    Ok((disagreements.is_empty(), json!({ "seed": seed, "irregularity_histogram": histogram, "disagreements": disagreements })))
}

fn c5_pulita() -> Outcome {
    let p = 5;
    let ratio = theta_d_ratio(&WittCoords::new(p, vec![1]), 1, 201, 40)?;
    let theta = dwork_theta(p, 201, 40)?;
    let d = ratio.series.sub(&theta)?;
    let bad: Vec<i64> = (0..=200).filter(|&k| d.coeff(k).is_some_and(|c| !c.is_zero())).collect();
    let covered = ratio.series.trunc().unwrap_or(0) > 200 && theta.trunc().unwrap_or(0) > 200;
    Ok((covered && bad.is_empty(), json!({ "mismatched_degrees": bad })))
}

fn c6_artin_hasse() -> Outcome {
    let mut failures = Vec::new();
    for p in [2u32, 3, 5, 7] {
        for (k, c) in artin_hasse_rational(p, 201).iter().enumerate() {
            if c.denom().is_multiple_of(&BigInt::from(p)) {
                failures.push(json!({ "p": p, "k": k }));
            }
        }
    }
    Ok((failures.is_empty(), json!({ "failures": failures })))
}

fn c7_wild() -> Outcome {
    let homs = [((5, 5, 2), (5, 4)), ((5, 5, 3), (5, 4)), ((7, 7, 2), (7, 6))];
    let classes = [(("A1", 5), 8), (("A2", 7), 18)];
    let mut out = Vec::new();
    let mut pass = true;
    for ((p, q, h), want) in homs {
        let got = hom_count(p, q, h)?;
        pass &= got == want;
        out.push(json!({ "hom_count": [p, q, h], "got": [got.0, got.1], "expected": [want.0, want.1] }));
    }
    for ((t, q), want) in classes {
        let got = class_count(t, q)?;
        pass &= got == want;
        out.push(json!({ "class_count": [t, q], "got": got, "expected": want }));
    }
    Ok((pass, Value::Array(out)))
}

/// Golden `Q_1 = [[0, 1/(32π)], [−3/(32π), 0]]` for the SL_2 Bessel reduction at `p = 5`.
pub fn canonical_q1_golden(prec: i64) -> Result<Matrix> {
    let p = 5;
    let u = PAdic::pi(p).mul_int(32).inv_prec(prec)?;
    Ok(Matrix::from_fn(p, 2, 2, |i, j| match (i, j) {
        (0, 1) => u.clone(),
        (1, 0) => u.mul_int(-3),
        _ => PAdic::zero(p),
    }))
}

fn c8_canonical(cfg: &AcceptanceConfig) -> Outcome {
    let t = 80;
    let prec = cfg.canonical_prec;
    let y = build_y(2, 5, CanonicalCase::Theta, prec + 200)?;
    let r = reduce_to_canonical(&y, t, prec)?;
    let residual_ok = r.residual_order >= t && r.residual(&y).vanishes_below(t);
    let verdict = convergence_diagnostic(&r.valuation_profile, 0.125)?;
    let golden = canonical_q1_golden(60)?;
    let q1 = r.q1();
    let q1_ok = q1.entries().iter().zip(golden.entries()).all(|(a, b)| a.agrees_mod(b, 40));
    let pass = residual_ok && r.pure && verdict.pass && q1_ok;
    Ok((
        pass,
        json!({
            "residual_order": r.residual_order, "residual_ok": residual_ok, "pure": r.pure,
            "slope": verdict.slope, "intercept": verdict.intercept, "diagnostic_pass": verdict.pass,
            "q1": q1.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(), "q1_matches_golden": q1_ok,
            "q1_values": q1.entries(),
        }),
    ))
}

fn c9_flagship(fp: &FlagshipParams) -> Outcome {
    let p = 5;
    let conn = theta_connection(2, &PAdic::pi(p))?;
    let fit = fit_integral_frame(&conn, fp.depth, fp.budget, fp.prec)?;
    let threshold = Ratio::from_integer(FLAGSHIP_OBJECTIVE_THRESHOLD);
    let objective_ok = fit.objective >= threshold;
    let b = &fit.b[0];
    let b_ok = b.agrees_mod(&PAdic::from_int(p, FLAGSHIP_B), 4 + fp.budget as i64);
    let mut measured = json!({
        "b": b.to_string(), "b_value": b, "b_digits": b.digits(fp.budget as i64), "objective": fit.objective.to_string(),
        "base_objective": fit.base_objective.to_string(), "locally_optimal": fit.locally_optimal(),
        "objective_ok": objective_ok, "b_matches_golden": b_ok,
    });
    if !objective_ok {
        return Ok((false, measured));
    }
    let sol = solve_formal(&conn, &fit.frame, fp.trunc, fp.prec)?;
    let mut traces = BTreeMap::new();
    let mut oracle = BTreeMap::new();
    let mut stable = Vec::new();
    for a in 1..p {
        let r = trace_teichmuller(&sol, a, FLAGSHIP_MODULUS, fp.prec)?;
        stable.push(r.stable_digits);
        traces.insert(a, r.value);
        oracle.insert(a, kloosterman(2, p, a)?.embed(fp.prec));
    }
    let m = normalize_to_oracle(&traces, &oracle, &default_twists(p, 2, fp.prec), FLAGSHIP_MODULUS);
    let label = m.twist.as_ref().map(|t| t.label.clone());
    let twist_ok = label.as_deref() == Some(FLAGSHIP_TWIST) && m.matched.len() == (p - 1) as usize;
    measured["stable_digits"] = json!(stable);
    measured["twist"] = json!(label);
    measured["matched"] = json!(m.matched);
    Ok((objective_ok && b_ok && twist_ok, measured))
}

fn random_padic(rng: &mut impl Rng, p: u32) -> PAdic {
    match rng.gen_range(0..10) {
        0 => PAdic::zero(p),
        1 => PAdic::from_int(p, rng.gen_range(-1000..1000)),
        _ => {
            let len = rng.gen_range(1..12);
            let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..p)).collect();
            digits[0] = rng.gen_range(1..p);
            let x = PAdic::from_digits(p, rng.gen_range(-4..6), &digits, Some(rng.gen_range(len as i64..40)));
            if rng.gen_bool(0.5) { x.neg() } else { x }
        }
    }
}

/// `v(x + y) ≥ min(v(x), v(y))`, with equality when the valuations differ.
pub fn ultrametric_holds(x: &PAdic, y: &PAdic) -> bool {
    let s = x.add(y);
    match (x.val_pi(), y.val_pi()) {
        (Some(a), Some(b)) => match s.val_pi() {
            Some(c) => c >= a.min(b) && (a == b || c == a.min(b)),
            None => a == b || s.abs_prec().is_some_and(|ap| ap <= a.min(b)),
        },
        (Some(a), None) => s.val_pi().is_none_or(|c| c == a) || s.abs_prec().is_some_and(|ap| ap <= a),
        (None, Some(b)) => s.val_pi().is_none_or(|c| c == b) || s.abs_prec().is_some_and(|ap| ap <= b),
        (None, None) => s.val_pi().is_none(),
    }
}

/// `g·(h·∇) = (gh)·∇` for `g = I + Σ M_k x^k`.
pub fn gauge_law_holds(rng: &mut impl Rng, conn: &MatrixConnection, trunc: i64, prec: i64) -> Result<bool> {
    let p = conn.p();
    let n = conn.size;
    let mut rand_g = || -> Result<(MatSeries, MatSeries)> {
        let mut coeffs = vec![Matrix::identity(p, n)];
        for _ in 0..3 {
            coeffs.push(Matrix::from_fn(p, n, n, |_, _| PAdic::from_int(p, rng.gen_range(-4..=4))));
        }
        let g = MatSeries::new(p, n, 0, coeffs, trunc);
        let gi = g.inverse(prec)?;
        Ok((g, gi))
    };
    let (g, gi) = rand_g()?;
    let (h, hi) = rand_g()?;
    let lhs = conn.gauge(&h, &hi)?.gauge(&g, &gi)?;
    let rhs = conn.gauge(&g.mul(&h), &hi.mul(&gi))?;
    let d = lhs.a.sub(&rhs.a);
    Ok(d.trunc >= trunc.min(20) && d.vanishes_below(d.trunc))
}

/// Second differences of `−log R(e^{−r})` on a uniform grid in `r` are `≥ 0`.
pub fn radius_convex(m: &RankOneModule, grid: &[f64]) -> bool {
    let f: Vec<f64> = grid.iter().map(|r| -m.generic_radius((-r).exp()).ln()).collect();
    f.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-9)
}

fn c10_properties(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ultra_fail = 0;
    for _ in 0..1000 {
        let p = [2u32, 3, 5, 7][rng.gen_range(0..4)];
        let (x, y) = (random_padic(&mut rng, p), random_padic(&mut rng, p));
        if !ultrametric_holds(&x, &y) {
            ultra_fail += 1;
        }
    }
    let mut teich_fail = 0;
    for p in [2u32, 3, 5, 7] {
        let t: Vec<PAdic> = (0..p as u64).map(|a| teichmuller(p, a, 40)).collect();
        for a in 0..p as usize {
            for b in 0..p as usize {
                if !t[a].mul(&t[b]).agrees_mod(&t[a * b % p as usize], 40) {
                    teich_fail += 1;
                }
            }
        }
    }
    let mut gauge_fail = 0;
    let conns = [theta_connection(2, &PAdic::pi(5))?, theta_connection(3, &PAdic::from_int(7, 2))?];
    for i in 0..20 {
        if !gauge_law_holds(&mut rng, &conns[i % 2], 24, 40)? {
            gauge_fail += 1;
        }
    }
    let mut galois_fail = 0;
    for n in [2u32, 3] {
        for a in 1..5u32 {
            let k = kloosterman(n, 5, a)?;
            for c in 1..5u32 {
                let ca = (pow_mod(c as u64, n as u64, 5) * a as u64 % 5) as u32;
                if !k.galois(c).same_value(&kloosterman(n, 5, ca)?) {
                    galois_fail += 1;
                }
            }
        }
    }
    let grid: Vec<f64> = (0..20).map(|i| 0.05 + 0.25 * i as f64).collect();
    let mut convex_fail = 0;
    for _ in 0..20 {
        if !radius_convex(&random_rank1(&mut rng)?, &grid) {
            convex_fail += 1;
        }
    }
    let pass = ultra_fail + teich_fail + gauge_fail + galois_fail + convex_fail == 0;
    Ok((
        pass,
        json!({ "seed": seed, "ultrametric_failures": ultra_fail, "teichmuller_failures": teich_fail,
            "gauge_failures": gauge_fail, "galois_failures": galois_fail, "convexity_failures": convex_fail }),
    ))
}
