//! Truncated Laurent series over `K`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PAdic, Valuation, DEFAULT_PREC};

/// `Σ_{k ≥ lowest} c_k var^k`, known below `trunc` (`None` = polynomial, exact tail).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicSeries {
    p: u32,
    var: String,
    lowest: i64,
    coeffs: Vec<PAdic>,
    trunc: Option<i64>,
}

fn min_trunc(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl PadicSeries {
    pub fn new(p: u32, var: &str, lowest: i64, coeffs: Vec<PAdic>, trunc: Option<i64>) -> PadicSeries {
        let mut s = PadicSeries { p, var: var.to_string(), lowest, coeffs, trunc };
        s.tidy();
        s
    }

    pub fn zero(p: u32, var: &str) -> PadicSeries {
        Self::new(p, var, 0, Vec::new(), None)
    }

    pub fn constant(c: PAdic, var: &str) -> PadicSeries {
        Self::new(c.p(), var, 0, vec![c], None)
    }

    pub fn one(p: u32, var: &str) -> PadicSeries {
        Self::constant(PAdic::one(p), var)
    }

    /// `c · var^k`.
    pub fn monomial(c: PAdic, k: i64, var: &str) -> PadicSeries {
        Self::new(c.p(), var, k, vec![c], None)
    }

    pub fn polynomial(p: u32, var: &str, coeffs: Vec<PAdic>) -> PadicSeries {
        Self::new(p, var, 0, coeffs, None)
    }

    /// Build a series of length `trunc` from a coefficient generator.
    pub fn from_fn(p: u32, var: &str, trunc: i64, f: impl FnMut(i64) -> PAdic) -> PadicSeries {
        let coeffs = (0..trunc.max(0)).map(f).collect();
        Self::new(p, var, 0, coeffs, Some(trunc))
    }

    /// Drop stored coefficients at or beyond `trunc`, and trailing exact zeros
    /// of polynomials.
    fn tidy(&mut self) {
        if let Some(t) = self.trunc {
            let keep = (t - self.lowest).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            self.coeffs.pop();
        }
        // lead with a nonzero coefficient where possible
        let lead = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lowest += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.lowest = match self.trunc {
                Some(t) => t.min(0),
                None => 0,
            };
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_polynomial(&self) -> bool {
        self.trunc.is_none()
    }

    /// Highest index with a stored coefficient plus one.
    pub fn end(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64
    }

    /// Coefficient of `var^k`; `None` when `k ≥ trunc`.
    pub fn coeff(&self, k: i64) -> Option<PAdic> {
        if self.trunc.is_some_and(|t| k >= t) {
            return None;
        }
        if k < self.lowest || k >= self.end() {
            return Some(PAdic::zero(self.p));
        }
        Some(self.coeffs[(k - self.lowest) as usize].clone())
    }

    /// Coefficient reference, treating missing entries as exact zero.
    fn c(&self, k: i64) -> Option<&PAdic> {
        if k < self.lowest || k >= self.end() {
            None
        } else {
            Some(&self.coeffs[(k - self.lowest) as usize])
        }
    }

    /// Iterate over stored `(k, c_k)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &PAdic)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.lowest + i as i64, c))
    }

    pub fn with_var(&self, var: &str) -> PadicSeries {
        let mut s = self.clone();
        s.var = var.to_string();
        s
    }

    fn check(&self, other: &PadicSeries) -> Result<()> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var.clone(), other.var.clone()));
        }
        assert_eq!(self.p, other.p, "series over different fields");
        Ok(())
    }

    pub fn truncate(&self, trunc: i64) -> PadicSeries {
        Self::new(self.p, &self.var, self.lowest, self.coeffs.clone(), min_trunc(self.trunc, Some(trunc)))
    }

    pub fn add(&self, other: &PadicSeries) -> Result<PadicSeries> {
        self.check(other)?;
        let trunc = min_trunc(self.trunc, other.trunc);
        let lo = self.lowest.min(other.lowest);
        let mut hi = self.end().max(other.end());
        if let Some(t) = trunc {
            hi = hi.min(t);
        }
        let zero = PAdic::zero(self.p);
        let coeffs = (lo..hi.max(lo))
            .map(|k| match (self.c(k), other.c(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => zero.clone(),
            })
            .collect();
        Ok(Self::new(self.p, &self.var, lo, coeffs, trunc))
    }

    pub fn neg(&self) -> PadicSeries {
        let coeffs = self.coeffs.iter().map(|c| c.neg()).collect();
        Self::new(self.p, &self.var, self.lowest, coeffs, self.trunc)
    }

    pub fn sub(&self, other: &PadicSeries) -> Result<PadicSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PAdic) -> PadicSeries {
        let coeffs = self.coeffs.iter().map(|x| x.mul(c)).collect();
        Self::new(self.p, &self.var, self.lowest, coeffs, self.trunc)
    }

    /// Multiply by `var^k`.
    pub fn shift(&self, k: i64) -> PadicSeries {
        Self::new(self.p, &self.var, self.lowest + k, self.coeffs.clone(), self.trunc.map(|t| t + k))
    }

    pub fn mul(&self, other: &PadicSeries) -> Result<PadicSeries> {
        self.check(other)?;
        // the known range of a product is limited by each factor's truncation
        // offset by the other factor's lowest term
        let trunc = min_trunc(
            self.trunc.map(|t| t + other.lowest),
            other.trunc.map(|t| t + self.lowest),
        );
        let lo = self.lowest + other.lowest;
        let mut hi = self.end() + other.end() - 1;
        if let Some(t) = trunc {
            hi = hi.min(t);
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Self::new(self.p, &self.var, lo, Vec::new(), trunc));
        }
        let n = (hi - lo).max(0) as usize;
        let mut out = vec![PAdic::zero(self.p); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(Self::new(self.p, &self.var, lo, out, trunc))
    }

    /// Substitute `var ↦ var^k`.
    pub fn compose_x_to_k(&self, k: i64) -> Result<PadicSeries> {
        if k < 1 {
            return Err(Error::InvalidInput(format!("compose_x_to_k needs k ≥ 1, got {k}")));
        }
        let zero = PAdic::zero(self.p);
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * k as usize);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                coeffs.extend(std::iter::repeat_n(zero.clone(), (k - 1) as usize));
            }
            coeffs.push(c.clone());
        }
        // a known coefficient below trunc*k stays known: the gaps are exact zeros
        let trunc = self.trunc.map(|t| (t - 1) * k + 1);
        Ok(Self::new(self.p, &self.var, self.lowest * k, coeffs, trunc))
    }

    /// `d/dvar`.
    pub fn derivative(&self) -> PadicSeries {
        let coeffs = self.terms().map(|(k, c)| c.mul_int(k)).collect();
        Self::new(self.p, &self.var, self.lowest - 1, coeffs, self.trunc.map(|t| t - 1))
    }

    /// `var · d/dvar`.
    pub fn theta_derivative(&self) -> PadicSeries {
        let coeffs = self.terms().map(|(k, c)| c.mul_int(k)).collect();
        Self::new(self.p, &self.var, self.lowest, coeffs, self.trunc)
    }

    /// Term-wise antiderivative `Σ c_k var^{k+1}/(k+1)`; requires `c_{-1} = 0`.
    pub fn integrate(&self, prec: i64) -> Result<PadicSeries> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.terms() {
            if k == -1 {
                if !c.is_zero() {
                    return Err(Error::InvalidInput("cannot integrate a residue term".into()));
                }
                coeffs.push(PAdic::zero(self.p));
                continue;
            }
            coeffs.push(c.div_prec(&PAdic::from_int(self.p, k + 1), prec)?);
        }
        Ok(Self::new(self.p, &self.var, self.lowest + 1, coeffs, self.trunc.map(|t| t + 1)))
    }

    /// Leading stored coefficient that is not indistinguishable from zero.
    fn leading(&self) -> Option<(i64, &PAdic)> {
        self.terms().find(|(_, c)| !c.is_zero())
    }

    /// Multiplicative inverse; the leading coefficient must be a known nonzero value.
    pub fn inverse(&self, prec: i64) -> Result<PadicSeries> {
        let (v, lead) = self.leading().ok_or_else(|| {
            Error::InsufficientPrecision("series is indistinguishable from zero".into())
        })?;
        if self.trunc.is_none() && self.coeffs.len() > 1 {
            return Err(Error::InvalidInput(
                "inverse of a non-monomial polynomial needs a truncation; call truncate first".into(),
            ));
        }
        let inv_lead = lead.inv_prec(prec)?;
        // u = self / (lead var^v) = 1 + higher
        let len = match self.trunc {
            Some(t) => (t - v).max(0) as usize,
            None => 1,
        };
        let u: Vec<PAdic> = (0..len).map(|i| self.c(v + i as i64).map_or(PAdic::zero(self.p), |c| c.mul(&inv_lead))).collect();
        let mut w = vec![PAdic::zero(self.p); len];
        if len > 0 {
            w[0] = PAdic::one(self.p);
        }
        for n in 1..len {
            let mut acc = PAdic::zero(self.p);
            for k in 1..=n {
                if !u[k].is_exact_zero() {
                    acc = acc.add(&u[k].mul(&w[n - k]));
                }
            }
            w[n] = acc.neg();
        }
        let coeffs = w.into_iter().map(|c| c.mul(&inv_lead)).collect();
        // self = lead var^v (1 + …) known below trunc: inverse known below trunc - 2v
        let trunc = self.trunc.map(|t| t - 2 * v);
        Ok(Self::new(self.p, &self.var, -v, coeffs, trunc))
    }

    pub fn div(&self, other: &PadicSeries, prec: i64) -> Result<PadicSeries> {
        self.mul(&other.inverse(prec)?)
    }

    /// `f'/f` (`theta = false`) or `var·f'/f` (`theta = true`).
    pub fn log_derivative(&self, theta: bool, prec: i64) -> Result<PadicSeries> {
        let d = if theta { self.theta_derivative() } else { self.derivative() };
        d.div(self, prec)
    }

    /// Formal exponential of a series without constant term.
    pub fn exp(&self, prec: i64) -> Result<PadicSeries> {
        if self.terms().any(|(k, c)| k <= 0 && !c.is_exact_zero()) {
            return Err(Error::NotExponentiable);
        }
        let trunc = self.trunc.ok_or_else(|| {
            Error::InvalidInput("exp of a polynomial needs a truncation order".into())
        })?;
        let p = self.p;
        let n = trunc.max(0) as usize;
        // g' = f' g  ⇒  m g_m = Σ_k k f_k g_{m-k}
        let kf: Vec<PAdic> = (0..n).map(|k| self.c(k as i64).map_or(PAdic::zero(p), |c| c.mul_int(k as i64))).collect();
        let mut g = vec![PAdic::zero(p); n];
        if n > 0 {
            g[0] = PAdic::one(p);
        }
        for m in 1..n {
            let mut acc = PAdic::zero(p);
            for k in 1..=m {
                if !kf[k].is_exact_zero() {
                    acc = acc.add(&kf[k].mul(&g[m - k]));
                }
            }
            g[m] = acc.div_prec(&PAdic::from_int(p, m as i64), prec)?;
        }
        Ok(Self::new(p, &self.var, 0, g, Some(trunc)))
    }

    /// Formal logarithm of a series with constant term 1.
    pub fn log(&self, prec: i64) -> Result<PadicSeries> {
        let c0 = self.coeff(0).unwrap_or(PAdic::zero(self.p));
        if self.lowest < 0 || !c0.sub(&PAdic::one(self.p)).is_zero() {
            return Err(Error::InvalidInput("log needs constant term 1".into()));
        }
        self.log_derivative(false, prec)?.integrate(prec)
    }

    /// Partial sums `S_N = Σ_{k < N} c_k x^k` for `N = lowest+1 ..= end`.
    pub fn partial_sums(&self, x: &PAdic, prec: i64) -> Result<Vec<PAdic>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut acc = PAdic::zero(self.p);
        let mut pw = x.pow_signed(self.lowest, prec)?;
        for c in &self.coeffs {
            acc = acc.add(&c.mul(&pw));
            out.push(acc.clone());
            pw = pw.mul(x);
        }
        Ok(out)
    }

    /// `(k, v(c_k))` for every stored coefficient.
    pub fn valuation_profile(&self) -> Vec<(i64, Valuation)> {
        self.terms().map(|(k, c)| (k, c.valuation())).collect()
    }

    /// All stored coefficients are zero at their precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficientwise agreement below `upto` at the precision carried by both.
    pub fn indistinguishable_from(&self, other: &PadicSeries, upto: i64) -> Result<bool> {
        let d = self.sub(other)?;
        Ok((d.lowest..upto.min(d.end())).all(|k| d.c(k).is_none_or(|c| c.is_zero())))
    }

    /// Round every coefficient to at most `prec` relative digits.
    pub fn with_rel_prec(&self, prec: i64) -> PadicSeries {
        let coeffs = self.coeffs.iter().map(|c| c.with_rel_prec(prec)).collect();
        Self::new(self.p, &self.var, self.lowest, coeffs, self.trunc)
    }

    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            p: self.p,
            var: self.var.clone(),
            lowest: self.lowest,
            trunc: self.trunc,
            coeffs: self.coeffs.clone(),
        }
    }
}

/// JSON layout of a series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub p: u32,
    pub var: String,
    pub lowest: i64,
    pub trunc: Option<i64>,
    pub coeffs: Vec<PAdic>,
}

impl Serialize for PadicSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SeriesRecord::deserialize(d)?;
        if r.coeffs.iter().any(|c| c.p() != r.p) {
            return Err(serde::de::Error::custom("coefficient prime differs from series prime"));
        }
        Ok(PadicSeries::new(r.p, &r.var, r.lowest, r.coeffs, r.trunc))
    }
}

impl fmt::Display for PadicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            if c.is_exact_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})·{}", self.var)?,
                _ => write!(f, "({c})·{}^{k}", self.var)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(t) = self.trunc {
            write!(f, " + O({}^{t})", self.var)?;
        }
        Ok(())
    }
}

/// Convenience: `exp(c · x)` to `trunc`.
pub fn exp_linear(c: &PAdic, var: &str, trunc: i64) -> Result<PadicSeries> {
    PadicSeries::monomial(c.clone(), 1, var).truncate(trunc).exp(DEFAULT_PREC)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldContext;

    fn x(p: u32) -> PadicSeries {
        PadicSeries::monomial(PAdic::one(p), 1, "x")
    }

    #[test]
    fn derivative_of_square() {
        let x2 = x(5).mul(&x(5)).unwrap();
        let d = x2.derivative();
        assert_eq!(d, PadicSeries::monomial(PAdic::from_int(5, 2), 1, "x"));
    }

    #[test]
    fn compose_square() {
        let c = x(5).compose_x_to_k(2).unwrap();
        assert_eq!(c, x(5).mul(&x(5)).unwrap());
        assert!(x(5).compose_x_to_k(0).is_err());
    }

    #[test]
    fn variable_mismatch() {
        let y = x(5).with_var("y");
        assert!(matches!(x(5).add(&y), Err(Error::VariableMismatch(_, _))));
    }

    #[test]
    fn exp_of_zero_and_constant() {
        let z = PadicSeries::zero(5, "x").truncate(10);
        let e = z.exp(40).unwrap();
        assert_eq!(e.coeff(0).unwrap().compare(&PAdic::one(5)), crate::padic::Comparison::Equal);
        assert!((1..10).all(|k| e.coeff(k).unwrap().is_zero()));
        let c = PadicSeries::one(5, "x").truncate(10);
        assert!(matches!(c.exp(40), Err(Error::NotExponentiable)));
    }

    #[test]
    fn exp_pi_x_valuation_at_five() {
        let k = FieldContext::new(5).unwrap();
        let e = exp_linear(&k.pi(), "x", 12).unwrap();
        // v(π^5/5!) = 5/4 - 1 = 1/4, i.e. one π-digit
        assert_eq!(e.coeff(5).unwrap().val_pi(), Some(1));
        for kk in 0..12 {
            // v(π^k/k!) in π-units: k - 4·v_5(k!)
            let vk: i64 = (1..=kk).map(|j| { let mut j = j; let mut v = 0; while j % 5 == 0 { j /= 5; v += 1; } v }).sum();
            assert_eq!(e.coeff(kk).unwrap().val_pi(), Some(kk - 4 * vk));
        }
    }

    #[test]
    fn inverse_and_group_law() {
        let k = FieldContext::new(7).unwrap();
        let f = PadicSeries::polynomial(7, "x", vec![PAdic::zero(7), k.pi(), k.int(3), k.pi().mul_int(2)]).truncate(30);
        let e = f.exp(40).unwrap();
        let en = f.neg().exp(40).unwrap();
        let prod = e.mul(&en).unwrap();
        assert!(prod.indistinguishable_from(&PadicSeries::one(7, "x"), 30).unwrap());
        let inv = e.inverse(40).unwrap();
        assert!(inv.indistinguishable_from(&en, 30).unwrap());
    }

    #[test]
    fn log_exp_roundtrip() {
        let k = FieldContext::new(5).unwrap();
        let f = PadicSeries::polynomial(5, "x", vec![PAdic::zero(5), k.pi(), k.int(5)]).truncate(25);
        let back = f.exp(60).unwrap().log(60).unwrap();
        assert!(back.indistinguishable_from(&f, 25).unwrap());
    }

    #[test]
    fn theta_derivative_coefficientwise() {
        let f = PadicSeries::polynomial(3, "x", (0..6).map(|i| PAdic::from_int(3, i * i + 1)).collect());
        let t = f.theta_derivative();
        for k in 0..6 {
            assert_eq!(t.coeff(k).unwrap(), f.coeff(k).unwrap().mul_int(k));
        }
    }

    #[test]
    fn serde_roundtrip() {
        let k = FieldContext::new(5).unwrap();
        let e = exp_linear(&k.pi(), "x", 8).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: PadicSeries = serde_json::from_str(&s).unwrap();
        assert!(back.indistinguishable_from(&e, 8).unwrap());
        assert_eq!(back.trunc(), Some(8));
    }
}
