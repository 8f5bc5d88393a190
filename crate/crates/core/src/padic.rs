//! Truncated arithmetic in the totally ramified field `K = Q_p(π)` with
//! `π^(p-1) = -p`.
//!
//! An element is stored as `π^val · u` where `u = c_0 + c_1 π + … + c_{e-1} π^{e-1}`
//! (`e = p - 1`) is a unit of `Z_p[π]`. Because the monomials `c_j π^j` have
//! valuations `e·v_p(c_j) + j` that are pairwise distinct modulo `e`, the
//! valuation of a coefficient vector is read off without any cancellation
//! analysis. Precision is capped-relative: `rel` counts the known π-digits of
//! the unit part, `None` marks an exact value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision (in π-digits) used when an exact value has to be rounded.
pub const DEFAULT_PREC: i64 = 40;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The field `K = Q_p(π)` for one prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldContext {
    p: u32,
}

impl FieldContext {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(FieldContext { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Ramification index `p - 1`.
    pub fn e(&self) -> u32 {
        self.p - 1
    }

    /// Dwork's π, exact.
    pub fn pi(&self) -> PAdic {
        PAdic::pi(self.p)
    }

    pub fn zero(&self) -> PAdic {
        PAdic::zero(self.p)
    }

    pub fn one(&self) -> PAdic {
        PAdic::one(self.p)
    }

    pub fn int(&self, n: i64) -> PAdic {
        PAdic::from_int(self.p, n)
    }

    pub fn ratio(&self, num: i64, den: i64, prec: i64) -> Result<PAdic> {
        PAdic::from_ratio(self.p, &BigInt::from(num), &BigInt::from(den), prec)
    }

    /// Valuation of π, i.e. `1/(p-1)`.
    pub fn omega_valuation(&self) -> Valuation {
        Valuation::finite(1, self.e())
    }

    pub fn teichmuller(&self, a: u64, prec: i64) -> PAdic {
        teichmuller(self.p, a, prec)
    }

    pub fn zeta_p(&self, prec: i64) -> PAdic {
        zeta_p(self.p, prec)
    }
}

/// Valuation normalised by `v(p) = 1`, stored with denominator `p - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valuation {
    /// `None` encodes `+∞`.
    pub numerator: Option<i64>,
    pub denominator: u32,
}

impl Valuation {
    pub fn finite(numerator: i64, denominator: u32) -> Self {
        Valuation { numerator: Some(numerator), denominator }
    }

    pub fn infinite(denominator: u32) -> Self {
        Valuation { numerator: None, denominator }
    }

    pub fn is_infinite(&self) -> bool {
        self.numerator.is_none()
    }

    pub fn as_ratio(&self) -> Option<Ratio<i64>> {
        self.numerator.map(|n| Ratio::new(n, self.denominator as i64))
    }

    pub fn as_f64(&self) -> f64 {
        match self.numerator {
            Some(n) => n as f64 / self.denominator as f64,
            None => f64::INFINITY,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numerator, other.numerator) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => {
                (a as i128 * other.denominator as i128).cmp(&(b as i128 * self.denominator as i128))
            }
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_ratio() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "+inf"),
        }
    }
}

/// Three-valued comparison outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Unequal,
    /// The difference is zero to the precision both operands carry.
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// `abs = None` is the exact zero; otherwise the value is `O(π^abs)`.
    Zero { abs: Option<i64> },
    Unit { val: i64, coeffs: Vec<BigInt>, rel: Option<i64> },
}

/// Element of `K`, known either exactly or modulo a power of π.
///
/// `PartialEq` is structural: two values compare equal only if they carry the
/// same digits and the same precision. Use [`PAdic::compare`] for the
/// precision-aware comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdic {
    p: u32,
    repr: Repr,
}

// ---------------------------------------------------------------------------
// coefficient-vector helpers (basis 1, π, …, π^{e-1})

fn vp_big(x: &BigInt, p: u32) -> u32 {
    debug_assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

fn vec_valuation(c: &[BigInt], p: u32) -> Option<i64> {
    let e = (p - 1) as i64;
    c.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| e * vp_big(x, p) as i64 + j as i64)
        .min()
}

fn mul_pi(c: &mut Vec<BigInt>, p: u32) {
    let last = c.pop().expect("non-empty basis");
    c.insert(0, -last * p);
}

fn shift_up(mut c: Vec<BigInt>, d: i64, p: u32) -> Vec<BigInt> {
    debug_assert!(d >= 0);
    let e = (p - 1) as i64;
    let (q, r) = (d / e, d % e);
    for _ in 0..r {
        mul_pi(&mut c, p);
    }
    if q > 0 {
        let f = BigInt::from(-(p as i64)).pow(q as u32);
        for x in c.iter_mut() {
            *x *= &f;
        }
    }
    c
}

/// Divide by `π^d`; the caller guarantees `d ≤ valuation`.
fn shift_down(mut c: Vec<BigInt>, d: i64, p: u32) -> Vec<BigInt> {
    debug_assert!(d >= 0);
    let e = (p - 1) as i64;
    let (q, r) = (d / e, d % e);
    if q > 0 {
        let f = BigInt::from(-(p as i64)).pow(q as u32);
        for x in c.iter_mut() {
            *x /= &f;
        }
    }
    let pb = BigInt::from(p);
    for _ in 0..r {
        let first = c.remove(0);
        c.push(-(first / &pb));
    }
    c
}

/// Reduce modulo `π^rel` into canonical non-negative residues.
fn reduce(c: &mut [BigInt], rel: i64, p: u32) {
    let e = (p - 1) as i64;
    if rel <= 0 {
        c.iter_mut().for_each(|x| *x = BigInt::zero());
        return;
    }
    let hi = (rel + e - 1) / e;
    let m_hi = BigInt::from(p).pow(hi as u32);
    let m_lo = &m_hi / p;
    for (j, x) in c.iter_mut().enumerate() {
        // modulus p^{ceil((rel - j)/e)}
        let k = (rel - j as i64 + e - 1) / e;
        let m = if k == hi { &m_hi } else if k == hi - 1 { &m_lo } else { unreachable!() };
        if k <= 0 {
            *x = BigInt::zero();
        } else {
            *x = x.mod_floor(m);
        }
    }
}

fn vec_mul(a: &[BigInt], b: &[BigInt], p: u32) -> Vec<BigInt> {
    let e = a.len();
    let mut r = vec![BigInt::zero(); 2 * e];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                r[i + j] += x * y;
            }
        }
    }
    let high: Vec<BigInt> = r.drain(e..).collect();
    for (k, h) in high.into_iter().enumerate() {
        if !h.is_zero() {
            r[k] -= h * p;
        }
    }
    r
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl PAdic {
    /// Normalise `π^shift · Σ c_j π^j` known modulo `π^abs`.
    fn normalize(p: u32, mut coeffs: Vec<BigInt>, shift: i64, abs: Option<i64>) -> PAdic {
        debug_assert_eq!(coeffs.len(), (p - 1) as usize);
        if let Some(a) = abs {
            reduce(&mut coeffs, a - shift, p);
        }
        match vec_valuation(&coeffs, p) {
            None => PAdic { p, repr: Repr::Zero { abs } },
            Some(v) => {
                let val = shift + v;
                if let Some(a) = abs {
                    if val >= a {
                        return PAdic { p, repr: Repr::Zero { abs } };
                    }
                }
                let mut unit = shift_down(coeffs, v, p);
                let rel = abs.map(|a| a - val);
                if let Some(r) = rel {
                    reduce(&mut unit, r, p);
                }
                PAdic { p, repr: Repr::Unit { val, coeffs: unit, rel } }
            }
        }
    }

    /// Build from coefficients on the basis `1, π, …, π^{p-2}` scaled by
    /// `π^shift`, known modulo `π^abs` (`None` = exact).
    pub fn from_basis(p: u32, coeffs: Vec<BigInt>, shift: i64, abs: Option<i64>) -> PAdic {
        assert_eq!(coeffs.len(), (p - 1) as usize, "basis length must be p - 1");
        Self::normalize(p, coeffs, shift, abs)
    }

    pub fn zero(p: u32) -> PAdic {
        PAdic { p, repr: Repr::Zero { abs: None } }
    }

    /// Zero known only modulo `π^abs`.
    pub fn zero_mod(p: u32, abs: i64) -> PAdic {
        PAdic { p, repr: Repr::Zero { abs: Some(abs) } }
    }

    pub fn one(p: u32) -> PAdic {
        Self::from_int(p, 1)
    }

    pub fn pi(p: u32) -> PAdic {
        let mut c = vec![BigInt::zero(); (p - 1) as usize];
        c[0] = BigInt::one();
        PAdic { p, repr: Repr::Unit { val: 1, coeffs: c, rel: None } }
    }

    pub fn from_int(p: u32, n: i64) -> PAdic {
        Self::from_bigint(p, &BigInt::from(n))
    }

    pub fn from_bigint(p: u32, n: &BigInt) -> PAdic {
        let mut c = vec![BigInt::zero(); (p - 1) as usize];
        c[0] = n.clone();
        Self::normalize(p, c, 0, None)
    }

    /// `num / den` rounded to `prec` relative π-digits unless it is an exact
    /// `π`-adic integer combination.
    pub fn from_ratio(p: u32, num: &BigInt, den: &BigInt, prec: i64) -> Result<PAdic> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = Self::from_bigint(p, num);
        let d = Self::from_bigint(p, den);
        n.div_prec(&d, prec)
    }

    pub fn from_rational(p: u32, q: &Ratio<BigInt>, prec: i64) -> Result<PAdic> {
        Self::from_ratio(p, q.numer(), q.denom(), prec)
    }

    pub fn p(&self) -> u32 {
        self.p
    }


    pub fn is_exact(&self) -> bool {
        match &self.repr {
            Repr::Zero { abs } => abs.is_none(),
            Repr::Unit { rel, .. } => rel.is_none(),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs: None })
    }

    /// Zero to the known precision (exact zero included).
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Valuation in units of `v(π)`, `None` when the value is zero at its precision.
    pub fn val_pi(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { val, .. } => Some(*val),
        }
    }

    /// Largest `k` such that the value is known to lie in `π^k O_K`.
    /// For a nonzero value this is its valuation; for `O(π^a)` it is `a`.
    pub fn val_pi_lower(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, .. } => Some(*val),
        }
    }

    pub fn valuation(&self) -> Valuation {
        let den = self.p - 1;
        match &self.repr {
            Repr::Zero { .. } => Valuation::infinite(den),
            Repr::Unit { val, .. } => Valuation::finite(*val, den),
        }
    }

    /// Absolute precision in π-digits (`None` = exact).
    pub fn abs_prec(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, rel, .. } => rel.map(|r| val + r),
        }
    }

    /// Relative precision in π-digits (`None` = exact; zero values report `Some(0)`).
    pub fn rel_prec(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { abs } => abs.map(|_| 0),
            Repr::Unit { rel, .. } => *rel,
        }
    }

    /// Basis coefficients of the value scaled to `π^val`, with `val`.
    pub fn unit_parts(&self) -> Option<(i64, &[BigInt])> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { val, coeffs, .. } => Some((*val, coeffs)),
        }
    }

    /// Reduce to absolute precision at most `abs`.
    pub fn truncate(&self, abs: i64) -> PAdic {
        match &self.repr {
            Repr::Zero { abs: a } => PAdic { p: self.p, repr: Repr::Zero { abs: Some(min_opt(*a, Some(abs)).unwrap()) } },
            Repr::Unit { val, coeffs, rel } => {
                let cur = rel.map(|r| val + r);
                let target = min_opt(cur, Some(abs));
                Self::normalize(self.p, coeffs.clone(), *val, target)
            }
        }
    }

    /// Round an exact value to `rel` relative digits; inexact values are
    /// capped at `rel` as well.
    pub fn with_rel_prec(&self, rel: i64) -> PAdic {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, .. } => self.truncate(val + rel),
        }
    }

    fn check_same_field(&self, other: &PAdic) {
        assert_eq!(self.p, other.p, "elements of different fields Q_{}(π) and Q_{}(π)", self.p, other.p);
    }

    pub fn neg(&self) -> PAdic {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, coeffs, rel } => {
                let c: Vec<BigInt> = coeffs.iter().map(|x| -x).collect();
                Self::normalize(self.p, c, *val, rel.map(|r| val + r))
            }
        }
    }

    pub fn add(&self, other: &PAdic) -> PAdic {
        self.check_same_field(other);
        let p = self.p;
        let abs = min_opt(self.abs_prec(), other.abs_prec());
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => PAdic { p, repr: Repr::Zero { abs } },
            (Repr::Zero { .. }, Repr::Unit { val, coeffs, .. })
            | (Repr::Unit { val, coeffs, .. }, Repr::Zero { .. }) => Self::normalize(p, coeffs.clone(), *val, abs),
            (
                Repr::Unit { val: va, coeffs: ca, .. },
                Repr::Unit { val: vb, coeffs: cb, .. },
            ) => {
                let w = (*va).min(*vb);
                let a = shift_up(ca.clone(), va - w, p);
                let b = shift_up(cb.clone(), vb - w, p);
                let s: Vec<BigInt> = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
                Self::normalize(p, s, w, abs)
            }
        }
    }

    pub fn sub(&self, other: &PAdic) -> PAdic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PAdic) -> PAdic {
        self.check_same_field(other);
        let p = self.p;
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs: None }, _) | (_, Repr::Zero { abs: None }) => PAdic::zero(p),
            (Repr::Zero { abs: Some(a) }, Repr::Zero { abs: Some(b) }) => PAdic::zero_mod(p, a + b),
            (Repr::Zero { abs: Some(a) }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::Zero { abs: Some(a) }) => PAdic::zero_mod(p, a + val),
            (
                Repr::Unit { val: va, coeffs: ca, rel: ra },
                Repr::Unit { val: vb, coeffs: cb, rel: rb },
            ) => {
                let c = vec_mul(ca, cb, p);
                let val = va + vb;
                let rel = min_opt(*ra, *rb);
                Self::normalize(p, c, val, rel.map(|r| val + r))
            }
        }
    }

    /// Multiply by `π^k` (exact shift, any sign).
    pub fn mul_pi_pow(&self, k: i64) -> PAdic {
        match &self.repr {
            Repr::Zero { abs } => PAdic { p: self.p, repr: Repr::Zero { abs: abs.map(|a| a + k) } },
            Repr::Unit { val, coeffs, rel } => {
                PAdic { p: self.p, repr: Repr::Unit { val: val + k, coeffs: coeffs.clone(), rel: *rel } }
            }
        }
    }

    pub fn mul_int(&self, n: i64) -> PAdic {
        self.mul(&PAdic::from_int(self.p, n))
    }

    /// Inverse; exact inputs other than `±π^k` are rounded to `DEFAULT_PREC`.
    pub fn inv(&self) -> Result<PAdic> {
        self.inv_prec(DEFAULT_PREC)
    }

    /// Inverse; exact inputs that are not `±π^k` are rounded to `cap`
    /// relative digits. Inexact inputs keep their relative precision.
    pub fn inv_prec(&self, cap: i64) -> Result<PAdic> {
        let p = self.p;
        match &self.repr {
            Repr::Zero { abs: None } => Err(Error::DivisionByZero),
            Repr::Zero { abs: Some(a) } => Err(Error::InsufficientPrecision(format!(
                "cannot invert a value indistinguishable from 0 modulo π^{a}"
            ))),
            Repr::Unit { val, coeffs, rel } => {
                let is_pm_one = coeffs[0].abs().is_one() && coeffs[1..].iter().all(|c| c.is_zero());
                if rel.is_none() && is_pm_one {
                    return Ok(PAdic { p, repr: Repr::Unit { val: -val, coeffs: coeffs.clone(), rel: None } });
                }
                let target = rel.unwrap_or(cap);
                let inv = unit_inverse(coeffs, target, p);
                Ok(Self::normalize(p, inv, -val, Some(-val + target)))
            }
        }
    }

    pub fn div(&self, other: &PAdic) -> Result<PAdic> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn div_prec(&self, other: &PAdic, cap: i64) -> Result<PAdic> {
        Ok(self.mul(&other.inv_prec(cap)?))
    }

    pub fn pow(&self, mut n: u64) -> PAdic {
        let mut base = self.clone();
        let mut acc = PAdic::one(self.p);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn pow_signed(&self, n: i64, cap: i64) -> Result<PAdic> {
        if n >= 0 {
            Ok(self.pow(n as u64))
        } else {
            Ok(self.inv_prec(cap)?.pow((-n) as u64))
        }
    }

    /// Precision-aware comparison.
    pub fn compare(&self, other: &PAdic) -> Comparison {
        let d = self.sub(other);
        match d.repr {
            Repr::Zero { abs: None } => Comparison::Equal,
            Repr::Zero { abs: Some(_) } => Comparison::Indistinguishable,
            Repr::Unit { .. } => Comparison::Unequal,
        }
    }

    /// True when `self - other ∈ π^k O_K` is certified.
    pub fn agrees_mod(&self, other: &PAdic, k: i64) -> bool {
        match self.sub(other).val_pi_lower() {
            None => true,
            Some(v) => v >= k,
        }
    }

    /// Residue class in `F_p` of an integral element.
    pub fn residue(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero { abs } => match abs {
                Some(a) if *a < 1 => None,
                _ => Some(0),
            },
            Repr::Unit { val, coeffs, rel } => {
                if *val > 0 {
                    Some(0)
                } else if *val == 0 && rel.is_none_or(|r| r >= 1) {
                    Some(coeffs[0].mod_floor(&BigInt::from(self.p)).to_u32().unwrap())
                } else {
                    None
                }
            }
        }
    }

    /// π-adic digits (in `0..p`) of the unit part, least significant first.
    /// Exact values are expanded to `limit` digits.
    pub fn digits(&self, limit: i64) -> Vec<u32> {
        let Repr::Unit { coeffs, rel, .. } = &self.repr else {
            return Vec::new();
        };
        let n = rel.unwrap_or(limit).min(limit).max(0);
        let p = self.p;
        let pb = BigInt::from(p);
        let mut u = coeffs.clone();
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let d = u[0].mod_floor(&pb);
            u[0] -= &d;
            out.push(d.to_u32().unwrap());
            // divide by π
            u = shift_down(u, 1, p);
        }
        out
    }

    /// Rebuild `π^shift · Σ digits[i] π^i + O(π^{shift+prec})`.
    pub fn from_digits(p: u32, shift: i64, digits: &[u32], prec: Option<i64>) -> PAdic {
        let e = (p - 1) as usize;
        let mut acc = vec![BigInt::zero(); e];
        let mut pw = vec![BigInt::zero(); e];
        pw[0] = BigInt::one();
        for &d in digits {
            for (a, x) in acc.iter_mut().zip(pw.iter()) {
                *a += x * d;
            }
            mul_pi(&mut pw, p);
        }
        let abs = prec.map(|r| shift + r);
        Self::normalize(p, acc, shift, abs)
    }

    pub fn to_record(&self) -> PAdicRecord {
        match &self.repr {
            Repr::Zero { abs } => PAdicRecord { p: self.p, shift: abs.unwrap_or(0), digits: Vec::new(), prec: abs.map(|_| 0), exact: None },
            Repr::Unit { val, rel, coeffs } => {
                let n = rel.unwrap_or(DEFAULT_PREC);
                let exact = rel.is_none().then(|| coeffs.clone());
                PAdicRecord { p: self.p, shift: *val, digits: self.digits(n), prec: Some(n), exact }
            }
        }
    }

    pub fn from_record(r: &PAdicRecord) -> Result<PAdic> {
        if !is_prime(r.p as u64) {
            return Err(Error::NotPrime(r.p as u64));
        }
        if r.digits.iter().any(|&d| d >= r.p) {
            return Err(Error::InvalidInput(format!("digit out of range for p = {}", r.p)));
        }
        if let Some(c) = &r.exact {
            if c.len() != (r.p - 1) as usize {
                return Err(Error::InvalidInput("exact basis must have p - 1 entries".into()));
            }
            return Ok(Self::from_basis(r.p, c.clone(), r.shift, None));
        }
        Ok(match r.prec {
            None => PAdic::zero(r.p),
            Some(prec) => Self::from_digits(r.p, r.shift, &r.digits, Some(prec)),
        })
    }

    /// Float approximation of `|x|` with `|p| = 1/p`.
    pub fn norm(&self) -> f64 {
        match self.val_pi() {
            None => 0.0,
            Some(v) => (self.p as f64).powf(-(v as f64) / (self.p - 1) as f64),
        }
    }
}

/// Inverse of a unit `u` modulo `π^target` by Newton iteration.
fn unit_inverse(u: &[BigInt], target: i64, p: u32) -> Vec<BigInt> {
    let e = (p - 1) as usize;
    let pb = BigInt::from(p);
    let c0 = u[0].mod_floor(&pb);
    let inv0 = c0.modpow(&BigInt::from(p - 2), &pb);
    let mut x = vec![BigInt::zero(); e];
    x[0] = inv0;
    let mut known = 1i64;
    let mut two = vec![BigInt::zero(); e];
    two[0] = BigInt::from(2);
    while known < target {
        known = (2 * known).min(target);
        let ux = vec_mul(u, &x, p);
        let mut t: Vec<BigInt> = two.iter().zip(ux).map(|(a, b)| a - b).collect();
        reduce(&mut t, known, p);
        x = vec_mul(&x, &t, p);
        reduce(&mut x, known, p);
    }
    reduce(&mut x, target, p);
    x
}

/// Teichmüller lift `[a]` of `a mod p` to absolute precision `prec`.
pub fn teichmuller(p: u32, a: u64, prec: i64) -> PAdic {
    let a = a % p as u64;
    if a == 0 {
        return PAdic::zero(p);
    }
    let e = (p - 1) as i64;
    let k = ((prec.max(1) + e - 1) / e) as u32 + 1;
    let m = BigInt::from(p).pow(k);
    let mut x = BigInt::from(a);
    let pb = BigInt::from(p);
    for _ in 0..k {
        x = x.modpow(&pb, &m);
    }
    let mut c = vec![BigInt::zero(); (p - 1) as usize];
    c[0] = x;
    PAdic::from_basis(p, c, 0, Some(prec))
}

/// An `n`-th root of `c` (`p ∤ n`), or `None` when none exists in `K`.
/// The root returned has the smallest residue class among the candidates.
pub fn nth_root(c: &PAdic, n: u32, prec: i64) -> Option<PAdic> {
    let p = c.p();
    if n == 0 || n.is_multiple_of(p) {
        return None;
    }
    let v = c.val_pi()?;
    if v % n as i64 != 0 {
        return None;
    }
    let u = c.mul_pi_pow(-v).with_rel_prec(prec);
    let u0 = u.residue()? as u64;
    let r0 = (1..p as u64).find(|r| crate::ffield::pow_mod(*r, n as u64, p as u64) == u0)?;
    let mut x = PAdic::from_int(p, r0 as i64).with_rel_prec(prec);
    let nn = PAdic::from_int(p, n as i64);
    let mut known = 1;
    while known < prec {
        let fx = x.pow(n as u64).sub(&u);
        let dfx = nn.mul(&x.pow(n as u64 - 1));
        x = x.sub(&fx.div_prec(&dfx, prec).ok()?).truncate(prec);
        known *= 2;
    }
    Some(x.mul_pi_pow(v / n as i64))
}

/// The primitive `p`-th root of unity `ζ ≡ 1 + π (mod π²)`.
///
/// Writes `ζ = 1 + π u`; then `u` is the root congruent to 1 of
/// `g(u) = 1 - u^{p-1} + Σ_{k=2}^{p-1} (C(p,k)/p) π^{k-1} u^{k-1}`, found by
/// Newton iteration (`g'(1) ≡ -(p-1)` is a unit).
pub fn zeta_p(p: u32, prec: i64) -> PAdic {
    if p == 2 {
        return PAdic::from_int(2, -1);
    }
    let work = prec + 4;
    let one = PAdic::one(p);
    let pi = PAdic::pi(p);
    // coefficients of g as a polynomial in u
    let mut g: Vec<PAdic> = vec![PAdic::zero(p); p as usize];
    g[0] = one.clone();
    g[(p - 1) as usize] = PAdic::from_int(p, -1);
    let mut binom = BigInt::from(p);
    for k in 2..p {
        binom = binom * (p - k + 1) / k;
        let c = PAdic::from_bigint(p, &(binom.clone() / p)).mul(&pi.pow((k - 1) as u64));
        g[(k - 1) as usize] = g[(k - 1) as usize].add(&c);
    }
    let dg: Vec<PAdic> = g.iter().enumerate().skip(1).map(|(i, c)| c.mul_int(i as i64)).collect();
    let eval = |poly: &[PAdic], x: &PAdic| {
        poly.iter().rev().fold(PAdic::zero(p), |acc, c| acc.mul(x).add(c))
    };
    let mut u = one.with_rel_prec(work);
    let mut known = 1;
    while known < work {
        let num = eval(&g, &u);
        let den = eval(&dg, &u);
        u = u.sub(&num.div_prec(&den, work).expect("g'(u) is a unit")).truncate(work);
        known *= 2;
    }
    one.add(&pi.mul(&u)).truncate(prec)
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs: None } => write!(f, "0"),
            Repr::Zero { abs: Some(a) } => write!(f, "O(π^{a})"),
            Repr::Unit { val, rel, .. } => {
                let shown = rel.unwrap_or(8).min(8);
                let digits = self.digits(shown);
                let mut first = true;
                for (i, d) in digits.iter().enumerate() {
                    if *d == 0 {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    let k = val + i as i64;
                    match k {
                        0 => write!(f, "{d}")?,
                        1 => write!(f, "{d}·π")?,
                        _ => write!(f, "{d}·π^{k}")?,
                    }
                }
                match rel {
                    Some(r) => write!(f, " + O(π^{})", val + r),
                    None if rel.unwrap_or(8) > shown => write!(f, " + …"),
                    None => Ok(()),
                }
            }
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&PAdic> for &PAdic {
            type Output = PAdic;
            fn $m(self, rhs: &PAdic) -> PAdic {
                PAdic::$m(self, rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        PAdic::neg(self)
    }
}

/// JSON record of a scalar; digits are little-endian in π.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicRecord {
    pub p: u32,
    pub shift: i64,
    pub digits: Vec<u32>,
    /// Relative precision; `null` only for the exact zero.
    pub prec: Option<i64>,
    /// Coordinates in the basis `1, π, …, π^{p-2}` of an exact value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<BigInt>>,
}

impl Serialize for PAdic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PAdicRecord::deserialize(d)?;
        PAdic::from_record(&r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32) -> FieldContext {
        FieldContext::new(p).unwrap()
    }

    #[test]
    fn rejects_composite() {
        assert!(matches!(FieldContext::new(6), Err(Error::NotPrime(6))));
        assert!(FieldContext::new(1).is_err());
    }

    #[test]
    fn pi_relation_holds() {
        for p in [2, 3, 5, 7, 11] {
            let f = k(p);
            let lhs = f.pi().pow((p - 1) as u64).add(&f.int(p as i64));
            assert!(lhs.is_exact_zero(), "p = {p}");
            // also after rounding
            let r = f.pi().with_rel_prec(10).pow((p - 1) as u64).add(&f.int(p as i64));
            assert!(r.is_zero());
        }
    }

    #[test]
    fn p2_pi_is_minus_two() {
        let f = k(2);
        assert_eq!(f.pi().compare(&f.int(-2)), Comparison::Equal);
    }

    #[test]
    fn valuation_of_pi_squared() {
        let f = k(5);
        let v = f.pi().mul(&f.pi()).valuation();
        assert_eq!(v.as_ratio(), Some(Ratio::new(1, 2)));
        assert_eq!(f.int(25).valuation().as_ratio(), Some(Ratio::new(2, 1)));
        assert!(f.zero().valuation().is_infinite());
    }

    #[test]
    fn precision_rules() {
        let f = k(5);
        let a = f.one().truncate(4);
        let b = f.pi().truncate(6);
        let c = a.mul(&b);
        assert_eq!(c.val_pi(), Some(1));
        assert_eq!(c.abs_prec(), Some(5));
        let pinv = f.pi().inv().unwrap();
        assert_eq!(pinv.val_pi(), Some(-1));
        assert!(pinv.is_exact());
        let s = f.one().add(&f.pi()).truncate(7).add(&f.one().sub(&f.pi()).truncate(7));
        assert_eq!(s.compare(&f.int(2)), Comparison::Indistinguishable);
        assert_eq!(s.abs_prec(), Some(7));
    }

    #[test]
    fn inverse_of_indistinguishable_zero_fails() {
        let z = PAdic::zero_mod(5, 3);
        assert!(matches!(z.inv(), Err(Error::InsufficientPrecision(_))));
        assert!(matches!(PAdic::zero(5).inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = k(7);
        let x = f.int(3).add(&f.pi().mul_int(5)).add(&f.pi().pow(3));
        let y = x.inv_prec(30).unwrap();
        let one = x.mul(&y);
        assert!(one.agrees_mod(&f.one(), 30));
    }

    #[test]
    fn teichmuller_basic() {
        let f = k(5);
        assert_eq!(f.teichmuller(1, 40).compare(&f.one()), Comparison::Indistinguishable);
        assert!(f.teichmuller(4, 40).agrees_mod(&f.int(-1), 40));
        let t2 = f.teichmuller(2, 40);
        assert!(t2.pow(4).agrees_mod(&f.one(), 40));
        assert_eq!(t2.residue(), Some(2));
        assert!(f.teichmuller(0, 40).is_exact_zero());
    }

    #[test]
    fn teichmuller_against_hensel_iteration() {
        // independent route: Newton on x^4 - 1 starting from 2 over Z/5^10
        let m = BigInt::from(5).pow(10);
        let mut x = BigInt::from(2);
        for _ in 0..6 {
            let fx = (x.pow(4) - 1u32).mod_floor(&m);
            let dfx = (BigInt::from(4) * x.pow(3)).mod_floor(&m);
            let inv = dfx.modpow(&(BigInt::from(4) * BigInt::from(5).pow(9) - 1u32), &m);
            x = (&x - fx * inv).mod_floor(&m);
        }
        let t = teichmuller(5, 2, 40);
        assert!(t.agrees_mod(&PAdic::from_bigint(5, &x), 40));
    }

    #[test]
    fn zeta_properties() {
        for p in [2u32, 3, 5, 7] {
            let f = k(p);
            let z = f.zeta_p(40);
            assert!(z.pow(p as u64).agrees_mod(&f.one(), 40), "p = {p}");
            assert!(z.agrees_mod(&f.one().add(&f.pi()), 2), "p = {p}");
            assert!(!z.agrees_mod(&f.one(), 40));
            let sum = (0..p).fold(f.zero(), |acc, j| acc.add(&z.pow(j as u64)));
            assert!(sum.agrees_mod(&f.zero(), 36), "p = {p}");
        }
    }

    #[test]
    fn digits_roundtrip() {
        let f = k(5);
        let x = f.int(-7).mul(&f.pi().pow(3)).add(&f.pi().inv().unwrap()).truncate(20);
        let r = x.to_record();
        let y = PAdic::from_record(&r).unwrap();
        assert_eq!(x.compare(&y), Comparison::Indistinguishable);
        assert_eq!(y.abs_prec(), x.abs_prec());
        let json = serde_json::to_string(&x).unwrap();
        let z: PAdic = serde_json::from_str(&json).unwrap();
        assert_eq!(z, y);
    }

    #[test]
    fn digits_of_minus_one_p5() {
        // -1 = 4 + 4·5 + … ; in π-digits with 5 = -π^4 the expansion differs but reconstructs.
        let m1 = PAdic::from_int(5, -1).with_rel_prec(12);
        let d = m1.digits(12);
        assert_eq!(d[0], 4);
        let back = PAdic::from_digits(5, 0, &d, Some(12));
        assert_eq!(back.compare(&m1), Comparison::Indistinguishable);
    }

    #[test]
    fn ratio_valuations() {
        let x = PAdic::from_ratio(5, &BigInt::from(3), &BigInt::from(50), 20).unwrap();
        assert_eq!(x.val_pi(), Some(-8));
        assert!(x.mul_int(50).agrees_mod(&PAdic::from_int(5, 3), 20 - 8));
    }
}
