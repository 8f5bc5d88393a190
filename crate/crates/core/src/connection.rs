//! Matrix connections `d + A·ω` on the torus and the affine line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::PrincipalData;
use crate::matrix::{MatSeries, Matrix};
use crate::padic::PAdic;
use crate::series::PadicSeries;

/// Truncation order standing for "polynomial, no error term".
pub const EXACT_TRUNC: i64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `ω = dx/x`, derivation `x d/dx`.
    Dlog,
    /// `ω = dx`, derivation `d/dx`.
    Dx,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixConnection {
    pub size: usize,
    pub form: Form,
    pub var: String,
    pub a: MatSeries,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionRecord {
    pub size: usize,
    pub form: Form,
    pub var: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<PadicSeries>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Serialize for MatrixConnection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixConnection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ConnectionRecord::deserialize(d)?;
        MatrixConnection::from_record(&r).map_err(serde::de::Error::custom)
    }
}

impl MatrixConnection {
    pub fn new(form: Form, var: &str, a: MatSeries) -> Self {
        MatrixConnection { size: a.n, form, var: var.to_string(), a, warnings: Vec::new() }
    }

    /// `d + (Σ_j A_j x^j)·ω` from exact matrix coefficients.
    pub fn polynomial(form: Form, var: &str, coeffs: Vec<Matrix>) -> Self {
        let n = coeffs[0].rows();
        let p = coeffs[0].p();
        Self::new(form, var, MatSeries::new(p, n, 0, coeffs, EXACT_TRUNC))
    }

    pub fn p(&self) -> u32 {
        self.a.p
    }

    pub fn is_exact(&self) -> bool {
        self.a.trunc >= EXACT_TRUNC
    }

    pub fn to_record(&self) -> ConnectionRecord {
        let mut a = self.a.to_entries(&self.var);
        if self.is_exact() {
            for row in a.iter_mut() {
                for e in row.iter_mut() {
                    let coeffs = e.terms().map(|(_, c)| c.clone()).collect();
                    *e = PadicSeries::new(e.p(), &self.var, e.lowest(), coeffs, None);
                }
            }
        }
        ConnectionRecord { size: self.size, form: self.form, var: self.var.clone(), a, warnings: self.warnings.clone() }
    }

    pub fn from_record(r: &ConnectionRecord) -> Result<Self> {
        if r.a.len() != r.size || r.a.iter().any(|row| row.len() != r.size) {
            return Err(Error::InvalidInput(format!("A is not {0}×{0}", r.size)));
        }
        let p = r.a[0][0].p();
        let a = MatSeries::from_entries(p, &r.a, EXACT_TRUNC);
        Ok(MatrixConnection { size: r.size, form: r.form, var: r.var.clone(), a, warnings: r.warnings.clone() })
    }

    /// Coefficient matrix of `x^k` in `A`.
    pub fn coeff(&self, k: i64) -> Matrix {
        self.a.coeff(k)
    }

    fn derive(&self, g: &MatSeries) -> MatSeries {
        match self.form {
            Form::Dlog => g.theta_derivative(),
            Form::Dx => g.derivative(),
        }
    }

    /// `A ↦ gAg⁻¹ + δ(g)g⁻¹`.
    pub fn gauge(&self, g: &MatSeries, g_inv: &MatSeries) -> Result<Self> {
        check_inverse(g, g_inv)?;
        let a = g.mul(&self.a).mul(g_inv).add(&self.derive(g).mul(g_inv));
        Ok(MatrixConnection { a, ..self.clone() })
    }

    /// Pullback along `x = s^k`.
    pub fn pullback_power(&self, k: i64, var: &str) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput("pullback exponent must be ≥ 1".into()));
        }
        let kk = PAdic::from_int(self.p(), k);
        let mut a = self.a.compose_pow(k).scale(&kk);
        if self.form == Form::Dx {
            a = a.shift(k - 1);
        }
        if self.is_exact() {
            a.trunc = EXACT_TRUNC;
        }
        Ok(MatrixConnection { a, var: var.to_string(), ..self.clone() })
    }

    /// `δ(φ)φ⁻¹ + φAφ⁻¹ − p·(x^p)^*A`.
    pub fn frobenius_residual(&self, phi: &MatSeries, phi_inv: &MatSeries) -> Result<MatSeries> {
        check_inverse(phi, phi_inv)?;
        let p = self.p() as i64;
        let mut frob = self.a.compose_pow(p).scale(&PAdic::from_int(self.p(), p));
        if self.form == Form::Dx {
            frob = frob.shift(p - 1);
        }
        if self.is_exact() {
            frob.trunc = EXACT_TRUNC;
        }
        let lhs = self.derive(phi).mul(phi_inv).add(&phi.mul(&self.a).mul(phi_inv));
        Ok(lhs.sub(&frob))
    }
}

fn check_inverse(g: &MatSeries, g_inv: &MatSeries) -> Result<()> {
    let prod = g.mul(g_inv);
    let id = MatSeries::constant(Matrix::identity(g.p, g.n), EXACT_TRUNC);
    if !prod.sub(&id).vanishes_below(prod.trunc) {
        return Err(Error::InsufficientPrecision("g·g⁻¹ differs from the identity".into()));
    }
    Ok(())
}

/// `d + (X_1 + λ^n X_low x) dx/x`.
pub fn theta_connection(n: usize, lam: &PAdic) -> Result<MatrixConnection> {
    if lam.is_zero() {
        return Err(Error::NotStable("λ = 0 gives a nilpotent leading term".into()));
    }
    let p = lam.p();
    if (n as u64).is_multiple_of(p as u64) {
        return Err(Error::HypothesisViolation(format!("p = {p} divides h = {n}")));
    }
    let d = PrincipalData::new(n, p)?;
    let c = lam.pow(n as u64);
    Ok(MatrixConnection::polynomial(Form::Dlog, "x", vec![d.x1.clone(), d.xlow.scale(&c)]))
}

/// `d + (X_1 + a λ^n X_low x) dx`.
pub fn airy_connection(n: usize, lam: &PAdic, a: Option<&PAdic>) -> Result<MatrixConnection> {
    let p = lam.p();
    if p as usize <= n {
        return Err(Error::HypothesisViolation(format!("Airy connections need p > h; got p = {p}, h = {n}")));
    }
    if lam.is_zero() {
        return Err(Error::NotStable("λ = 0 gives a nilpotent leading term".into()));
    }
    let one = PAdic::one(p);
    let a = a.unwrap_or(&one);
    let d = PrincipalData::new(n, p)?;
    let c = a.mul(&lam.pow(n as u64));
    let mut conn = MatrixConnection::polynomial(Form::Dx, "x", vec![d.x1.clone(), d.xlow.scale(&c)]);
    if a.val_pi() != Some(0) {
        conn.warnings.push(format!("coefficient a = {a} is not a p-adic unit"));
    }
    Ok(conn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::dwork_theta;

    fn pi(p: u32) -> PAdic {
        PAdic::pi(p)
    }

    #[test]
    fn bessel_shape() {
        let lam = PAdic::from_int(5, 3);
        let c = theta_connection(2, &lam).unwrap();
        assert_eq!(c.form, Form::Dlog);
        assert_eq!(c.coeff(0), Matrix::unit(5, 2, 0, 1));
        assert_eq!(c.coeff(1), Matrix::unit(5, 2, 1, 0).scale(&PAdic::from_int(5, 9)));
        let c = theta_connection(2, &pi(5).neg()).unwrap();
        assert_eq!(c.coeff(1).get(1, 0), &pi(5).mul(&pi(5)));
        let c1 = theta_connection(1, &lam).unwrap();
        assert_eq!(c1.coeff(0).get(0, 0), &PAdic::zero(5));
        assert_eq!(c1.coeff(1).get(0, 0), &lam);
        assert!(matches!(theta_connection(2, &PAdic::zero(5)), Err(Error::NotStable(_))));
    }

    #[test]
    fn airy_shape() {
        let lam = PAdic::from_int(7, 2);
        let c = airy_connection(3, &lam, None).unwrap();
        assert_eq!(c.form, Form::Dx);
        assert!(c.coeff(0).trace().is_exact_zero() && c.coeff(1).trace().is_exact_zero());
        assert!(c.warnings.is_empty());
        let w = airy_connection(2, &lam, Some(&PAdic::from_int(7, 7))).unwrap();
        assert_eq!(w.warnings.len(), 1);
        assert!(matches!(airy_connection(7, &lam, None), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn gauge_trivial() {
        let c = theta_connection(2, &PAdic::from_int(5, 2)).unwrap();
        let id = MatSeries::constant(Matrix::identity(5, 2), 30);
        let g = c.gauge(&id, &id).unwrap();
        assert!(g.a.sub(&c.a).vanishes_below(30));
        let s = MatSeries::constant(Matrix::scalar(&PAdic::from_int(5, 3), 2), 30);
        let si = s.inverse(30).unwrap();
        let g = c.gauge(&s, &si).unwrap();
        assert!(g.a.sub(&c.a).vanishes_below(30));
    }

    #[test]
    fn pullback_laws() {
        let c = theta_connection(2, &PAdic::from_int(5, 2)).unwrap();
        assert_eq!(c.pullback_power(1, "x").unwrap(), c);
        let c2 = c.pullback_power(2, "s").unwrap();
        assert_eq!(c2.coeff(0), c.coeff(0).scale(&PAdic::from_int(5, 2)));
        assert_eq!(c2.coeff(2), c.coeff(1).scale(&PAdic::from_int(5, 2)));
        assert_eq!(c2.pullback_power(3, "t").unwrap().a, c.pullback_power(6, "t").unwrap().a);
        let a = airy_connection(2, &PAdic::from_int(5, 2), None).unwrap();
        assert_eq!(a.pullback_power(2, "s").unwrap().pullback_power(2, "t").unwrap().a, a.pullback_power(4, "t").unwrap().a);
    }

    #[test]
    fn dwork_residual() {
        let p = 5;
        let conn = MatrixConnection::polynomial(Form::Dx, "x", vec![Matrix::scalar(&pi(p).neg(), 1)]);
        let th = dwork_theta(p, 101, 60).unwrap();
        let phi = MatSeries::from_entries(p, &[vec![th.clone()]], 101);
        let phi_inv = MatSeries::from_entries(p, &[vec![th.inverse(60).unwrap()]], 101);
        let r = conn.frobenius_residual(&phi, &phi_inv).unwrap();
        assert!(r.trunc >= 100);
        assert!(r.vanishes_below(100));
        // perturbation by (1 + x) is detected
        let bumped = th.mul(&PadicSeries::polynomial(p, "x", vec![PAdic::one(p), PAdic::one(p)])).unwrap();
        let bphi = MatSeries::from_entries(p, &[vec![bumped.clone()]], 101);
        let bphi_inv = MatSeries::from_entries(p, &[vec![bumped.inverse(60).unwrap()]], 101);
        let r = conn.frobenius_residual(&bphi, &bphi_inv).unwrap();
        assert!(!r.coeff(0).is_zero());
    }

    #[test]
    fn residual_identity_zero() {
        let conn = MatrixConnection::polynomial(Form::Dlog, "x", vec![Matrix::zeros(5, 2, 2)]);
        let id = MatSeries::constant(Matrix::identity(5, 2), 20);
        assert!(conn.frobenius_residual(&id, &id).unwrap().vanishes_below(20));
    }

    #[test]
    fn json_roundtrip() {
        let c = theta_connection(2, &PAdic::from_int(5, 2)).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"form\":\"dlog\""));
        let back: MatrixConnection = serde_json::from_str(&s).unwrap();
        assert_eq!(back.a.coeff(0), c.a.coeff(0));
        assert_eq!(back.a.coeff(1), c.a.coeff(1));
        assert_eq!(back.form, c.form);
    }
}
