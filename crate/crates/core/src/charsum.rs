//! Exact exponential sums in `Z[ζ_p]` and their images in `K`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{pow_mod, GaloisField};
use crate::padic::{is_prime, zeta_p, PAdic};

/// `Σ_j counts[j] ζ^j`, unreduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CycloVector {
    pub p: u32,
    pub counts: Vec<i64>,
}

impl CycloVector {
    pub fn zero(p: u32) -> Self {
        CycloVector { p, counts: vec![0; p as usize] }
    }

    /// `c · ζ^j`.
    pub fn monomial(p: u32, j: i64, c: i64) -> Self {
        let mut v = Self::zero(p);
        v.counts[j.rem_euclid(p as i64) as usize] = c;
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        CycloVector { p: self.p, counts }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.p as usize;
        let mut counts = vec![0; p];
        for (i, a) in self.counts.iter().enumerate() {
            for (j, b) in other.counts.iter().enumerate() {
                counts[(i + j) % p] += a * b;
            }
        }
        CycloVector { p: self.p, counts }
    }

    /// Galois conjugate `ζ ↦ ζ^c`.
    pub fn galois(&self, c: u32) -> Self {
        let p = self.p as usize;
        let mut counts = vec![0; p];
        for (j, a) in self.counts.iter().enumerate() {
            counts[j * c as usize % p] += a;
        }
        CycloVector { p: self.p, counts }
    }

    /// Canonical form modulo `Σ ζ^j = 0`: subtract the minimum count.
    pub fn reduced(&self) -> Self {
        let m = *self.counts.iter().min().unwrap_or(&0);
        CycloVector { p: self.p, counts: self.counts.iter().map(|c| c - m).collect() }
    }

    /// Equality in `Z[ζ_p]`.
    pub fn same_value(&self, other: &Self) -> bool {
        self.reduced() == other.reduced()
    }

    pub fn term_count(&self) -> i64 {
        self.counts.iter().sum()
    }

    /// Image in `K` under `ζ ↦ ζ_p`, the root with `ζ_p ≡ 1 + π`.
    pub fn embed(&self, prec: i64) -> PAdic {
        let z = zeta_p(self.p, prec);
        let mut pw = PAdic::one(self.p);
        let mut acc = PAdic::zero(self.p);
        for &c in &self.counts {
            if c != 0 {
                acc = acc.add(&pw.mul_int(c));
            }
            pw = pw.mul(&z).truncate(prec);
        }
        acc.truncate(prec)
    }
}

/// One term `num/den · x^exp` of a Laurent polynomial over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub num: i64,
    pub den: i64,
    pub exp: i64,
}

impl Term {
    pub fn new(num: i64, den: i64, exp: i64) -> Self {
        Term { num, den, exp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    All,
    Units,
}

/// `Σ_{x ∈ domain ⊂ F_{p^s}} ζ^{Tr(f(x))}`.
pub fn psi_sum_fq(p: u32, s: usize, f: &[Term], domain: Domain) -> Result<CycloVector> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let pp = p as i64;
    let mut coeffs = Vec::with_capacity(f.len());
    for t in f {
        if t.den.rem_euclid(pp) == 0 {
            return Err(Error::BadCharacteristic(format!("denominator {} is divisible by {p}", t.den)));
        }
        let inv = pow_mod(t.den.rem_euclid(pp) as u64, (p - 2) as u64, p as u64) as i64;
        coeffs.push(((t.num.rem_euclid(pp) * inv) % pp, t.exp));
    }
    let needs_units = domain == Domain::Units || f.iter().any(|t| t.exp < 0);
    if needs_units && domain == Domain::All {
        return Err(Error::InvalidInput("negative exponents need the unit domain".into()));
    }
    let field = GaloisField::new(p, s)?;
    let q1 = field.order() - 1;
    let mut out = CycloVector::zero(p);
    for x in field.elements() {
        if domain == Domain::Units && field.is_zero(&x) {
            continue;
        }
        let mut val = field.zero();
        for &(c, e) in &coeffs {
            if c == 0 {
                continue;
            }
            let xe = if e >= 0 {
                if e == 0 { field.one() } else { field.pow(&x, e as u64) }
            } else {
                field.pow(&x, ((e % q1 as i64) + q1 as i64) as u64 % q1)
            };
            val = field.add(&val, &field.scale(c as u32, &xe));
        }
        out.counts[field.trace(&val) as usize] += 1;
    }
    Ok(out)
}

pub fn psi_sum(p: u32, f: &[Term], domain: Domain) -> Result<CycloVector> {
    psi_sum_fq(p, 1, f, domain)
}

/// `Kl_n(a) = Σ_{x_1⋯x_n = a} ζ^{x_1 + … + x_n}` over `F_p`.
pub fn kloosterman(n: u32, p: u32, a: u32) -> Result<CycloVector> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let a = a % p;
    if a == 0 {
        return Err(Error::InvalidInput("Kloosterman sums need a ≠ 0".into()));
    }
    let pm = p as u64;
    let mut out = CycloVector::zero(p);
    // enumerate x_1..x_{n-1} in F_p^×, x_n = a / (x_1⋯x_{n-1})
    let free = (n - 1) as usize;
    let mut xs = vec![1u64; free];
    loop {
        let prod = xs.iter().fold(1u64, |acc, x| acc * x % pm);
        let last = a as u64 * pow_mod(prod, pm - 2, pm) % pm;
        let s = (xs.iter().sum::<u64>() + last) % pm;
        out.counts[s as usize] += 1;
        // odometer
        let mut i = 0;
        loop {
            if i == free {
                return Ok(out);
            }
            xs[i] += 1;
            if xs[i] < pm {
                break;
            }
            xs[i] = 1;
            i += 1;
        }
    }
}

/// `Σ_{x ∈ F_p} ζ^{x^{n+1}/(n+1) + a x}`.
pub fn airy_sum(n: u32, p: u32, a: u32) -> Result<CycloVector> {
    if (n as u64 + 1).is_multiple_of(p as u64) {
        return Err(Error::BadCharacteristic(format!("p = {p} divides n + 1 = {}", n + 1)));
    }
    psi_sum(p, &[Term::new(1, n as i64 + 1, n as i64 + 1), Term::new(a as i64, 1, 1)], Domain::All)
}
