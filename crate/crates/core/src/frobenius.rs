//! Frobenius structures of θ- and Airy connections: order-by-order
//! solution, initial-frame fitting, Teichmüller traces and twist matching.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::connection::{Form, MatrixConnection};
use crate::error::{Error, Result};
use crate::ffield::mult_order;
use crate::matrix::{MatSeries, Matrix};
use crate::padic::{teichmuller, PAdic};

/// Frames `z·φ_0` with `z = a + Σ_i b_i p^i X_1^i` in the centralizer of `X_1`.
#[derive(Debug, Clone, Serialize)]
pub struct FrameFamily {
    pub n: usize,
    pub p: u32,
    pub form: Form,
    /// `φ_0 = diag(1, p^{-1}, …, p^{-(n-1)})`.
    pub base: Matrix,
    pub x1: Matrix,
}

impl FrameFamily {
    /// Number of unipotent coordinates `b_1, …, b_{n-1}`.
    pub fn coordinates(&self) -> usize {
        self.n - 1
    }

    fn centralizer(&self, a: &PAdic, b: &[PAdic]) -> Matrix {
        let mut z = Matrix::scalar(a, self.n);
        let mut xi = Matrix::identity(self.p, self.n);
        let mut pi_pow = PAdic::one(self.p);
        let pp = PAdic::from_int(self.p, self.p as i64);
        for bi in b.iter().take(self.coordinates()) {
            xi = xi.mul(&self.x1);
            pi_pow = pi_pow.mul(&pp);
            z = z.add(&xi.scale(&bi.mul(&pi_pow)));
        }
        z
    }

    pub fn member(&self, a: &PAdic, b: &[PAdic]) -> Matrix {
        self.centralizer(a, b).mul(&self.base)
    }

    /// Inverse of `member(a, b)`; exact when `a = ±π^k` and `b` is exact.
    pub fn member_inverse(&self, a: &PAdic, b: &[PAdic], prec: i64) -> Result<Matrix> {
        let ainv = a.inv_prec(prec)?;
        let nil = self.centralizer(&PAdic::zero(self.p), b).scale(&ainv);
        // (1 + N)^{-1} = Σ (-N)^j
        let mut zinv = Matrix::identity(self.p, self.n);
        let mut term = Matrix::identity(self.p, self.n);
        for _ in 1..self.n {
            term = term.mul(&nil).neg();
            zinv = zinv.add(&term);
        }
        let base_inv = Matrix::diagonal(&(0..self.n).map(|i| PAdic::from_int(self.p, (self.p as i64).pow(i as u32))).collect::<Vec<_>>());
        Ok(base_inv.mul(&zinv).scale(&ainv))
    }
}

fn is_principal_nilpotent(m: &Matrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let e = m.get(i, j);
            if j == i + 1 {
                e.compare(&PAdic::one(m.p())) == crate::Comparison::Equal
            } else {
                e.is_exact_zero()
            }
        })
    })
}

pub fn frame_family(conn: &MatrixConnection) -> Result<FrameFamily> {
    if conn.a.lowest < 0 {
        return Err(Error::UnsupportedConnection("A has a pole at x = 0".into()));
    }
    let x1 = conn.coeff(0);
    if !is_principal_nilpotent(&x1) {
        return Err(Error::UnsupportedConnection("leading term is not the principal nilpotent X_1".into()));
    }
    let p = conn.p();
    let base = Matrix::diagonal(
        &(0..conn.size)
            .map(|i| PAdic::one(p).mul_pi_pow(0).div(&PAdic::from_int(p, (p as i64).pow(i as u32))))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(FrameFamily { n: conn.size, p, form: conn.form, base, x1 })
}

/// `φ = Σ_k φ_k x^k` solving the Frobenius equation below `x^trunc`.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusSolution {
    pub phi: MatSeries,
    pub frame: Matrix,
    pub form: Form,
    /// Σ v_p(k) over the orders `k` divisible by `p`.
    pub loss: i64,
    /// Relative working precision of each coefficient (π-digits).
    pub prec: i64,
}

impl FrobeniusSolution {
    pub fn trunc(&self) -> i64 {
        self.phi.trunc
    }

    /// `φ_k · frame⁻¹`.
    pub fn normalized(&self, frame_inv: &Matrix) -> Vec<Matrix> {
        self.phi.coeffs.iter().map(|c| c.mul(frame_inv)).collect()
    }
}

fn v_p(mut k: i64, p: i64) -> i64 {
    let mut v = 0;
    while k != 0 && k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}

pub fn solve_formal(conn: &MatrixConnection, frame: &Matrix, trunc: i64, prec: i64) -> Result<FrobeniusSolution> {
    if trunc < 1 {
        return Err(Error::InvalidInput("truncation must be ≥ 1".into()));
    }
    if conn.a.lowest < 0 {
        return Err(Error::UnsupportedConnection("A has a pole at x = 0".into()));
    }
    let p = conn.p();
    let pp = p as i64;
    let n = conn.size;
    let pk = PAdic::from_int(p, pp);
    let a_deg = conn.a.end();
    let a: Vec<Matrix> = (0..a_deg).map(|j| conn.coeff(j)).collect();
    let a0 = a[0].clone();
    if conn.form == Form::Dlog {
        let mut pw = Matrix::identity(p, n);
        for _ in 0..n {
            pw = pw.mul(&a0);
        }
        if !pw.is_zero() {
            return Err(Error::UnsupportedConnection("residue A(0) is not nilpotent".into()));
        }
        if !frame.mul(&a0).sub(&a0.mul(frame).scale(&pk)).is_zero() {
            return Err(Error::InvalidInput("frame does not satisfy φ_0 A(0) = p A(0) φ_0".into()));
        }
    }
    let pa0 = a0.scale(&pk);
    let mut phi: Vec<Matrix> = vec![frame.with_rel_prec(prec)];
    let mut loss = 0;
    for k in 1..trunc {
        let kk = PAdic::from_int(p, k);
        if k % pp == 0 {
            loss += v_p(k, pp);
        }
        let mut r = Matrix::zeros(p, n, n);
        let next = match conn.form {
            Form::Dlog => {
                for (j, aj) in a.iter().enumerate().skip(1) {
                    let j = j as i64;
                    if j <= k && !aj.is_exact_zero() {
                        r = r.sub(&phi[(k - j) as usize].mul(aj));
                    }
                    if pp * j <= k && !aj.is_exact_zero() {
                        r = r.add(&aj.mul(&phi[(k - pp * j) as usize]).scale(&pk));
                    }
                }
                // (k + N)^{-1}, N(M) = M A_0 - p A_0 M nilpotent
                let mut term = r.map(|x| x.div_prec(&kk, prec).expect("k ≠ 0"));
                let mut acc = term.clone();
                for _ in 0..2 * n {
                    let nt = term.mul(&a0).sub(&pa0.mul(&term));
                    if nt.is_exact_zero() {
                        break;
                    }
                    term = nt.map(|x| x.div_prec(&kk, prec).expect("k ≠ 0")).neg();
                    acc = acc.add(&term);
                }
                acc
            }
            Form::Dx => {
                for (j, aj) in a.iter().enumerate() {
                    let j = j as i64;
                    if aj.is_exact_zero() {
                        continue;
                    }
                    if k - 1 - j >= 0 {
                        r = r.sub(&phi[(k - 1 - j) as usize].mul(aj));
                    }
                    if k - pp - pp * j >= 0 {
                        r = r.add(&aj.mul(&phi[(k - pp - pp * j) as usize]).scale(&pk));
                    }
                }
                r.map(|x| x.div_prec(&kk, prec).expect("k ≠ 0"))
            }
        };
        phi.push(next.with_rel_prec(prec));
    }
    Ok(FrobeniusSolution { phi: MatSeries::new(p, n, 0, phi, trunc), frame: frame.clone(), form: conn.form, loss, prec })
}

/// One alternative digit tried around the fitted parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub coordinate: usize,
    pub position: usize,
    pub digit: u32,
    pub objective: Ratio<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub a: PAdic,
    pub b: Vec<PAdic>,
    pub frame: Matrix,
    pub objective: Ratio<i64>,
    pub base_objective: Ratio<i64>,
    pub epsilon: Ratio<i64>,
    pub depth: i64,
    pub digit_budget: usize,
    /// `v_π(g_k)` for `k = 0..depth`.
    pub profile: Vec<Option<i64>>,
    pub no_improvement: bool,
    pub probe: Vec<ProbeEntry>,
}

impl FitReport {
    /// Every probed perturbation scores strictly below the fitted frame.
    pub fn locally_optimal(&self) -> bool {
        self.probe.iter().all(|e| e.objective < self.objective)
    }
}

/// `ε = 1/(2(p-1))`.
pub fn fit_epsilon(p: u32) -> Ratio<i64> {
    Ratio::new(1, 2 * (p as i64 - 1))
}

struct Scorer<'a> {
    conn: &'a MatrixConnection,
    fam: FrameFamily,
    depth: i64,
    prec: i64,
    eps: Ratio<i64>,
}

impl Scorer<'_> {
    fn profile(&self, b: &[PAdic]) -> Result<Vec<Option<i64>>> {
        let one = PAdic::one(self.fam.p);
        let frame = self.fam.member(&one, b);
        let finv = self.fam.member_inverse(&one, b, self.prec)?;
        let sol = solve_formal(self.conn, &frame, self.depth + 1, self.prec)?;
        Ok(sol.normalized(&finv).iter().map(|g| g.val_pi()).collect())
    }

    /// `min_{1 ≤ k ≤ depth} (v_p(g_k) − εk)`.
    fn objective(&self, profile: &[Option<i64>]) -> Ratio<i64> {
        let e = self.fam.p as i64 - 1;
        profile
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(k, v)| v.map(|v| Ratio::new(v, e) - self.eps * k as i64))
            .min()
            .unwrap_or_else(|| Ratio::from_integer(i64::MAX / 4))
    }

    fn score(&self, b: &[PAdic]) -> Result<Ratio<i64>> {
        Ok(self.objective(&self.profile(b)?))
    }
}

/// Greedy π-adic digit search over the unipotent frame coordinates.
pub fn fit_integral_frame(conn: &MatrixConnection, depth: i64, digit_budget: usize, prec: i64) -> Result<FitReport> {
    if depth < 10 {
        return Err(Error::InvalidInput("fit depth must be ≥ 10".into()));
    }
    let fam = frame_family(conn)?;
    let p = fam.p;
    let m = fam.coordinates();
    let sc = Scorer { conn, fam, depth, prec, eps: fit_epsilon(p) };
    let mut b = vec![PAdic::zero(p); m];
    let base_objective = sc.score(&b)?;
    let mut best = base_objective;
    let mut decisive = Vec::new();
    let mut pi_pow = PAdic::one(p);
    for j in 0..digit_budget {
        for i in 0..m {
            let mut choice = (0u32, None::<Ratio<i64>>);
            let mut all_equal = true;
            for r in 0..p {
                let mut trial = b.clone();
                trial[i] = trial[i].add(&pi_pow.mul_int(r as i64));
                let s = sc.score(&trial)?;
                match choice.1 {
                    None => choice = (r, Some(s)),
                    Some(cur) => {
                        if s != cur {
                            all_equal = false;
                        }
                        if s > cur {
                            choice = (r, Some(s));
                        }
                    }
                }
            }
            b[i] = b[i].add(&pi_pow.mul_int(choice.0 as i64));
            best = choice.1.unwrap();
            if !all_equal {
                decisive.push((i, j, choice.0));
            }
        }
        pi_pow = pi_pow.mul_pi_pow(1);
    }
    let one = PAdic::one(p);
    let profile = sc.profile(&b)?;
    let objective = sc.objective(&profile);
    debug_assert!(m == 0 || objective == best);
    let mut probe = Vec::new();
    for &(i, j, r) in &decisive {
        let pj = PAdic::one(p).mul_pi_pow(j as i64);
        for alt in (0..p).filter(|&x| x != r) {
            let mut trial = b.clone();
            trial[i] = trial[i].add(&pj.mul_int(alt as i64 - r as i64));
            probe.push(ProbeEntry { coordinate: i, position: j, digit: alt, objective: sc.score(&trial)? });
        }
    }
    Ok(FitReport {
        frame: sc.fam.member(&one, &b),
        a: one,
        b,
        objective,
        base_objective,
        epsilon: sc.eps,
        depth,
        digit_budget,
        profile,
        no_improvement: objective <= base_objective,
        probe,
    })
}

/// Tr φ([a]) by partial sums; fails with the report attached when fewer
/// than `required` π-digits are stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub a: u32,
    pub partial_sums: Vec<PAdic>,
    pub stable_digits: i64,
    pub required: i64,
    pub value: PAdic,
}

pub fn trace_teichmuller(sol: &FrobeniusSolution, a: u32, required: i64, prec: i64) -> Result<TraceReport> {
    let p = sol.phi.p;
    if a.is_multiple_of(p) && sol.form == Form::Dlog {
        return Err(Error::InvalidInput("x = 0 is singular for a dx/x connection".into()));
    }
    let x = if a.is_multiple_of(p) { PAdic::zero(p) } else { teichmuller(p, a as u64, prec) };
    let mut sums = Vec::with_capacity(sol.phi.coeffs.len());
    let mut acc = PAdic::zero(p);
    let mut xk = PAdic::one(p);
    for c in &sol.phi.coeffs {
        acc = acc.add(&c.trace().mul(&xk));
        xk = xk.mul(&x).truncate(prec);
        sums.push(acc.clone());
    }
    let value = acc.clone();
    let cap = value.abs_prec().unwrap_or(prec);
    let t = sums.len();
    let stable = sums[t / 2..t.saturating_sub(1)]
        .iter()
        .map(|s| value.sub(s).val_pi_lower().unwrap_or(cap))
        .min()
        .unwrap_or(cap)
        .min(cap);
    let report = TraceReport { a, partial_sums: sums, stable_digits: stable, required, value };
    if stable < required {
        return Err(Error::ConvergenceShortfall(Box::new(report)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct Twist {
    pub label: String,
    pub value: PAdic,
}

/// `ε·p^j` for `ε` in the Teichmüller roots of unity of order dividing `2h`
/// and `-2 ≤ j ≤ 2`.
pub fn default_twists(p: u32, h: usize, prec: i64) -> Vec<Twist> {
    let mut units: Vec<(String, PAdic)> = vec![("1".into(), PAdic::one(p)), ("-1".into(), PAdic::from_int(p, -1))];
    for g in 2..(p as u64 - 1) {
        if (2 * h as u64).is_multiple_of(mult_order(g, p as u64)) {
            units.push((format!("[{g}]"), teichmuller(p, g, prec)));
        }
    }
    let mut out = Vec::new();
    for j in [0i64, -1, 1, -2, 2] {
        for (name, u) in &units {
            let value = u.mul_pi_pow(j * (p as i64 - 1)).mul_int(if j % 2 == 0 { 1 } else { -1 });
            let label = match j {
                0 => name.clone(),
                _ if j > 0 => {
                    let pw = if j == 1 { "p".to_string() } else { format!("p^{j}") };
                    match name.as_str() {
                        "1" => pw,
                        "-1" => format!("-{pw}"),
                        _ => format!("{name}·{pw}"),
                    }
                }
                _ => {
                    let pw = if j == -1 { "p".to_string() } else { format!("p^{}", -j) };
                    format!("{name}/{pw}")
                }
            };
            out.push(Twist { label, value });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchResult {
    /// `None` when no twist matches any point.
    pub twist: Option<Twist>,
    pub matched: Vec<u32>,
    pub mismatched: Vec<u32>,
    pub exact: bool,
    pub modulus: i64,
}

/// Twist `u` maximizing the points with `traces(a) ≡ u·oracle(a) mod π^modulus`.
pub fn normalize_to_oracle(
    traces: &BTreeMap<u32, PAdic>,
    oracle: &BTreeMap<u32, PAdic>,
    twists: &[Twist],
    modulus: i64,
) -> MatchResult {
    let keys: Vec<u32> = traces.keys().filter(|k| oracle.contains_key(k)).copied().collect();
    let mut best: Option<(usize, &Twist, Vec<u32>)> = None;
    for t in twists {
        let ok: Vec<u32> = keys.iter().copied().filter(|k| traces[k].agrees_mod(&t.value.mul(&oracle[k]), modulus)).collect();
        if best.as_ref().is_none_or(|(n, _, _)| ok.len() > *n) {
            best = Some((ok.len(), t, ok));
        }
    }
    match best {
        Some((n, t, ok)) if n > 0 => {
            let mismatched = keys.iter().copied().filter(|k| !ok.contains(k)).collect::<Vec<_>>();
            MatchResult { twist: Some(t.clone()), exact: mismatched.is_empty(), matched: ok, mismatched, modulus }
        }
        _ => MatchResult { twist: None, matched: Vec::new(), mismatched: keys, exact: false, modulus },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::theta_connection;
    use crate::witt::dwork_theta;

    fn dwork_conn(p: u32) -> MatrixConnection {
        theta_connection(1, &PAdic::pi(p).neg()).unwrap()
    }

    #[test]
    fn family_shapes() {
        let c = theta_connection(2, &PAdic::from_int(5, 2)).unwrap();
        let f = frame_family(&c).unwrap();
        let b = PAdic::from_int(5, 3);
        let m = f.member(&PAdic::from_int(5, 2), std::slice::from_ref(&b));
        assert_eq!(m.get(0, 1), &PAdic::from_int(5, 3));
        assert_eq!(m.get(1, 1).mul_int(5), PAdic::from_int(5, 2));
        assert!(f.base.mul(&f.x1).sub(&f.x1.mul(&f.base).scale(&PAdic::from_int(5, 5))).is_exact_zero());
        let inv = f.member_inverse(&PAdic::one(5), std::slice::from_ref(&b), 40).unwrap();
        assert_eq!(f.member(&PAdic::one(5), &[b]).mul(&inv), Matrix::identity(5, 2));
        let d = frame_family(&dwork_conn(5)).unwrap();
        assert_eq!(d.coordinates(), 0);
    }

    #[test]
    fn rejects_non_principal() {
        let c = MatrixConnection::polynomial(Form::Dlog, "x", vec![Matrix::identity(5, 2)]);
        assert!(matches!(frame_family(&c), Err(Error::UnsupportedConnection(_))));
    }

    #[test]
    fn dwork_from_recursion() {
        let p = 5;
        let sol = solve_formal(&dwork_conn(p), &Matrix::identity(p, 1), 80, 60).unwrap();
        let th = dwork_theta(p, 80, 60).unwrap();
        for k in 0..80 {
            assert!(sol.phi.coeff(k).get(0, 0).agrees_mod(&th.coeff(k).unwrap(), 40), "k = {k}");
        }
        let sol2 = solve_formal(&dwork_conn(p), &Matrix::identity(p, 1), 80, 60).unwrap();
        assert_eq!(sol.phi, sol2.phi);
    }

    #[test]
    fn scaling_and_residual() {
        let p = 5;
        let c = theta_connection(2, &PAdic::pi(p)).unwrap();
        let f = frame_family(&c).unwrap();
        let s1 = solve_formal(&c, &f.base, 30, 60).unwrap();
        let three = PAdic::from_int(p, 3);
        let s3 = solve_formal(&c, &f.base.scale(&three), 30, 60).unwrap();
        for k in 0..30 {
            assert!(s3.phi.coeff(k).sub(&s1.phi.coeff(k).scale(&three)).is_zero());
        }
        let inv = s1.phi.inverse(60).unwrap();
        let r = c.frobenius_residual(&s1.phi, &inv).unwrap();
        assert!(r.vanishes_below(r.trunc));
        assert!(r.trunc >= 29);
    }

    #[test]
    fn airy_residual() {
        let p = 7;
        let c = crate::connection::airy_connection(2, &PAdic::pi(p), None).unwrap();
        let frame = Matrix::identity(p, 2);
        let s = solve_formal(&c, &frame, 40, 60).unwrap();
        let r = c.frobenius_residual(&s.phi, &s.phi.inverse(60).unwrap()).unwrap();
        assert!(r.vanishes_below(r.trunc) && r.trunc >= 38);
    }

    #[test]
    fn dwork_traces() {
        let p = 5;
        let sol = solve_formal(&dwork_conn(p), &Matrix::identity(p, 1), 200, 60).unwrap();
        let z = crate::padic::zeta_p(p, 60);
        for a in 1..p {
            let rep = trace_teichmuller(&sol, a, 20, 60).unwrap();
            assert!(rep.value.agrees_mod(&z.pow(a as u64), 20));
        }
        assert!(matches!(trace_teichmuller(&sol, 0, 1, 60), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn constant_trace() {
        let id = FrobeniusSolution {
            phi: MatSeries::constant(Matrix::identity(5, 3), 10),
            frame: Matrix::identity(5, 3),
            form: Form::Dlog,
            loss: 0,
            prec: 40,
        };
        let rep = trace_teichmuller(&id, 1, 10, 40).unwrap();
        assert_eq!(rep.value, PAdic::from_int(5, 3));
    }

    #[test]
    fn shortfall_carries_report() {
        let sol = solve_formal(&dwork_conn(5), &Matrix::identity(5, 1), 12, 40).unwrap();
        match trace_teichmuller(&sol, 1, 30, 40) {
            Err(Error::ConvergenceShortfall(r)) => assert!(r.stable_digits < 30),
            other => panic!("expected shortfall, got {other:?}"),
        }
    }

    #[test]
    fn twist_matching() {
        let p = 5;
        let tw = default_twists(p, 2, 40);
        assert!(tw.iter().any(|t| t.label == "-1/p"));
        let oracle: BTreeMap<u32, PAdic> = (1..5).map(|a| (a, PAdic::from_int(p, a as i64 + 7))).collect();
        let m = normalize_to_oracle(&oracle, &oracle, &tw, 20);
        assert_eq!(m.twist.unwrap().label, "1");
        assert!(m.exact);
        let scaled: BTreeMap<u32, PAdic> = oracle.iter().map(|(k, v)| (*k, v.mul_int(-5))).collect();
        let m = normalize_to_oracle(&scaled, &oracle, &tw, 20);
        assert_eq!(m.twist.unwrap().label, "-p");
        let junk: BTreeMap<u32, PAdic> = oracle.keys().map(|k| (*k, PAdic::pi(p).mul_pi_pow(100))).collect();
        let m = normalize_to_oracle(&junk, &oracle, &tw, 20);
        assert!(m.twist.is_none());
    }
}
