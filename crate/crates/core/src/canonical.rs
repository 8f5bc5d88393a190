//! Gauge reduction of the pulled-back connection `Y` at infinity to its
//! canonical form `Z`, and convergence diagnostics for the gauge `Q`.

use serde::Serialize;

use crate::connection::{Form, MatrixConnection, EXACT_TRUNC};
use crate::error::{Error, Result};
use crate::fit::{least_squares, linear_lower_bound, LinearBound};
use crate::lie::PrincipalData;
use crate::matrix::{MatSeries, Matrix};
use crate::padic::PAdic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalCase {
    Theta,
    Airy,
}

/// θ: `d + 2hπ(X_1 + X_low) ds/s² − ρ̌ ds/s`;
/// Airy: `d + 2hπ(X_1 + X_low) s^{-2-2h} ds/s − ρ̌ ds/s`.
pub fn build_y(n: usize, p: u32, case: CanonicalCase, prec: i64) -> Result<MatrixConnection> {
    let h = n as u64;
    match case {
        CanonicalCase::Theta if (2 * h).is_multiple_of(p as u64) => {
            return Err(Error::HypothesisViolation(format!("p = {p} divides 2h = {}", 2 * h)))
        }
        CanonicalCase::Airy if p as u64 <= h => {
            return Err(Error::HypothesisViolation(format!("Airy reduction needs p > h; got p = {p}, h = {h}")))
        }
        _ => {}
    }
    let d = PrincipalData::new(n, p)?;
    let l = match case {
        CanonicalCase::Theta => 1,
        CanonicalCase::Airy => 2 * n as i64 + 2,
    };
    let c = PAdic::pi(p).mul_int(2 * n as i64);
    let lead = d.x1.add(&d.xlow).scale(&c);
    let mut coeffs = vec![Matrix::zeros(p, n, n); l as usize + 1];
    coeffs[0] = lead;
    coeffs[l as usize] = d.rho_check(prec)?.neg();
    Ok(MatrixConnection::new(Form::Dlog, "s", MatSeries::new(p, n, -l, coeffs, EXACT_TRUNC)))
}

/// Conjugation `T(Q) = M Q M⁻¹` for `M` with `M^n` scalar, so `T^n = 1`.
struct AdjointSplit {
    n: usize,
    m: Matrix,
    m_inv: Matrix,
    inv_n: PAdic,
}

impl AdjointSplit {
    fn new(m: &Matrix, prec: i64) -> Result<Self> {
        let n = m.rows();
        let p = m.p();
        if (n as u64).is_multiple_of(p as u64) {
            return Err(Error::UnsupportedConnection(format!("p = {p} divides the rank {n}")));
        }
        let mut pw = Matrix::identity(p, n);
        for _ in 0..n {
            pw = pw.mul(m);
        }
        let mu = pw.get(0, 0).clone();
        if mu.is_zero() || !pw.sub(&Matrix::scalar(&mu, n)).is_zero() {
            return Err(Error::UnsupportedConnection("leading term is not regular semisimple of the form c·(X_1 + X_low)".into()));
        }
        let mut m_pow = Matrix::identity(p, n);
        for _ in 0..n - 1 {
            m_pow = m_pow.mul(m);
        }
        let m_inv = m_pow.scale(&mu.inv_prec(prec)?);
        Ok(AdjointSplit { n, m: m.clone(), m_inv, inv_n: PAdic::from_int(p, n as i64).inv_prec(prec)? })
    }

    fn conj(&self, q: &Matrix) -> Matrix {
        self.m.mul(q).mul(&self.m_inv)
    }

    /// Projection onto the centralizer: average over `T^j`.
    fn ker(&self, q: &Matrix) -> Matrix {
        let mut acc = q.clone();
        let mut t = q.clone();
        for _ in 1..self.n {
            t = self.conj(&t);
            acc = acc.add(&t);
        }
        acc.scale(&self.inv_n)
    }

    /// `ad_M⁻¹(R)` for `R` in the image: with `S = R M⁻¹`,
    /// `Q = (1/n) Σ_j j·T^j(S)` because `Σ_j j ω^j = n/(ω-1)` for `ω^n = 1`, `ω ≠ 1`.
    fn ad_inv(&self, r: &Matrix) -> Matrix {
        let p = r.p();
        let mut t = r.mul(&self.m_inv);
        let mut acc = Matrix::zeros(p, self.n, self.n);
        for j in 1..self.n {
            t = self.conj(&t);
            acc = acc.add(&t.scale(&PAdic::from_int(p, j as i64)));
        }
        acc.scale(&self.inv_n)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionResult {
    /// Gauge `Q = I + Σ Q_k s^k`. Coefficients below `residual_order` are
    /// final; the ker parts of the last `pole_order` stored ones are zero.
    pub q: MatSeries,
    pub z: MatrixConnection,
    pub pole_order: i64,
    pub residual_order: i64,
    /// `Z` has no terms below the leading one.
    pub pure: bool,
    /// `(k, v_p(Q_k))` for `1 ≤ k < residual_order`, `None` when `Q_k = 0`.
    pub valuation_profile: Vec<(i64, Option<f64>)>,
}

impl ReductionResult {
    pub fn q1(&self) -> Matrix {
        self.q.coeff(1)
    }

    /// `QYQ⁻¹ + sQ'Q⁻¹ − Z` written as `QY + sQ' − ZQ`.
    pub fn residual(&self, y: &MatrixConnection) -> MatSeries {
        self.q.mul(&y.a).add(&self.q.theta_derivative()).sub(&self.z.a.mul(&self.q))
    }
}

/// Solve `QY + sQ' = ZQ` for `Y = M s^{-L} + Y_0`, `Z = M s^{-L} + P_ker(Y_0)`.
pub fn reduce_to_canonical(y: &MatrixConnection, t: i64, prec: i64) -> Result<ReductionResult> {
    if y.form != Form::Dlog {
        return Err(Error::UnsupportedConnection("reduction expects a ds/s connection".into()));
    }
    let l = -y.a.lowest;
    if l < 1 {
        return Err(Error::UnsupportedConnection("Y has no pole at s = 0".into()));
    }
    for k in (-l + 1)..y.a.end() {
        if k != 0 && !y.coeff(k).is_exact_zero() {
            return Err(Error::UnsupportedConnection(format!("unexpected term at s^{k}")));
        }
    }
    let p = y.p();
    let n = y.size;
    let m = y.coeff(-l);
    let y0 = y.coeff(0);
    let split = AdjointSplit::new(&m, prec)?;
    let w = split.ker(&y0);
    let total = t + l;
    let mut q: Vec<Matrix> = Vec::with_capacity(total as usize);
    q.push(Matrix::identity(p, n));
    for k in 1..total {
        let j = k - l;
        let rhs = if j < 0 {
            Matrix::zeros(p, n, n)
        } else if j == 0 {
            w.sub(&y0)
        } else {
            let ju = j as usize;
            let kk = PAdic::from_int(p, j);
            let ker = split.ker(&q[ju].mul(&y0)).neg().map(|x| x.div_prec(&kk, prec).expect("j ≥ 1"));
            q[ju] = q[ju].add(&ker).with_rel_prec(prec);
            let qj = &q[ju];
            let shifted = y0.add(&Matrix::scalar(&kk, n));
            w.mul(qj).sub(&qj.mul(&shifted))
        };
        if !split.ker(&rhs).is_zero() {
            return Err(Error::InsufficientPrecision(format!("ker defect at order {k} did not cancel")));
        }
        q.push(split.ad_inv(&rhs.neg()).with_rel_prec(prec));
    }
    let qs = MatSeries::new(p, n, 0, q, total);
    let mut zc = vec![Matrix::zeros(p, n, n); l as usize + 1];
    zc[0] = m;
    zc[l as usize] = w.clone();
    let z = MatrixConnection::new(Form::Dlog, "s", MatSeries::new(p, n, -l, zc, EXACT_TRUNC));
    let e = (p - 1) as f64;
    let valuation_profile = (1..t).map(|k| (k, qs.coeff(k).val_pi().map(|v| v as f64 / e))).collect();
    let res = ReductionResult { q: qs, z, pole_order: l, residual_order: t, pure: w.is_zero(), valuation_profile };
    let r = res.residual(y);
    if r.trunc < t || !r.vanishes_below(t) {
        return Err(Error::InsufficientPrecision("reduction residual does not vanish to the requested order".into()));
    }
    Ok(res)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceVerdict {
    pub pass: bool,
    pub tol: f64,
    /// Least-squares `v_k ≈ A + B k`.
    pub intercept: f64,
    pub slope: f64,
    /// Lower convex hull chord `v_k ≥ α k − β`.
    pub lower_bound: Option<LinearBound>,
    pub window: (i64, i64),
    pub residuals: Vec<f64>,
}

/// Fit `v_p(Q_k) ≈ A + Bk`; PASS iff `B ≥ −tol`.
pub fn convergence_diagnostic(profile: &[(i64, Option<f64>)], tol: f64) -> Result<ConvergenceVerdict> {
    if profile.len() < 20 {
        return Err(Error::InvalidInput(format!("need at least 20 orders, got {}", profile.len())));
    }
    let pts: Vec<(i64, f64)> = profile.iter().filter_map(|(k, v)| v.map(|v| (*k, v))).collect();
    let window = (profile[0].0, profile[profile.len() - 1].0);
    if pts.len() < 2 {
        return Ok(ConvergenceVerdict { pass: true, tol, intercept: 0.0, slope: 0.0, lower_bound: None, window, residuals: Vec::new() });
    }
    let (a, b) = least_squares(&pts);
    let residuals = pts.iter().map(|(k, v)| v - (a + b * *k as f64)).collect();
    Ok(ConvergenceVerdict {
        pass: b >= -tol,
        tol,
        intercept: a,
        slope: b,
        lower_bound: Some(linear_lower_bound(&pts)),
        window,
        residuals,
    })
}
