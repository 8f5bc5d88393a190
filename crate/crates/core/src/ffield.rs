//! Small finite fields `F_{p^k}` as `F_p[t]/(f)`.

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// Element: coefficients in `0..p`, little-endian in `t`, length `k`.
pub type Elem = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    p: u32,
    k: usize,
    /// Monic modulus `f`, length `k + 1`.
    modulus: Vec<u32>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Multiplicative order of `a` modulo `n` (gcd(a, n) = 1).
pub fn mult_order(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let mut x = a % n;
    let mut k = 1;
    while x != 1 {
        x = x * (a % n) % n;
        k += 1;
    }
    k
}

/// `(p, s)` with `q = p^s`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let mut r = q;
    let mut s = 0;
    while r.is_multiple_of(p) {
        r /= p;
        s += 1;
    }
    (r == 1 && is_prime(p)).then_some((p as u32, s))
}

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// `a mod b` over `F_p` (b nonzero).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    let db = b.len() - 1;
    let inv = inv_mod(b[db], p);
    while r.len() > db {
        let c = (r[r.len() - 1] as u64 * inv as u64 % p as u64) as u32;
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            let sub = (c as u64 * *bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + *x as u64 * *y as u64) % p as u64;
        }
    }
    let v: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    poly_rem(&v, m, p)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: `f` of degree `k` is irreducible iff `t^{p^k} ≡ t` and
/// `gcd(t^{p^{k/r}} - t, f) = 1` for each prime `r | k`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    if k == 1 {
        return true;
    }
    let t = vec![0, 1];
    let frob = |x: &Vec<u32>, times: usize| {
        let mut y = x.clone();
        for _ in 0..times {
            y = poly_powmod(&y, p as u64, f, p);
        }
        y
    };
    let sub_t = |mut y: Vec<u32>| {
        y.resize(y.len().max(2), 0);
        y[1] = (y[1] + p - 1) % p;
        poly_trim(&mut y);
        y
    };
    if !sub_t(frob(&t, k)).is_empty() {
        return false;
    }
    for r in 2..=k {
        if k.is_multiple_of(r) && is_prime(r as u64) {
            let g = poly_gcd(f, &sub_t(frob(&t, k / r)), p);
            if g.len() != 1 {
                return false;
            }
        }
    }
    true
}

fn poly_powmod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut r = vec![1u32];
    let mut b = poly_rem(a, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mulmod(&r, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    r
}

impl GaloisField {
    /// `F_{p^k}` with the lexicographically first monic irreducible modulus.
    pub fn new(p: u32, k: usize) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if k == 0 {
            return Err(Error::InvalidInput("field degree must be positive".into()));
        }
        let count = (p as u64).checked_pow(k as u32).ok_or(Error::TooLarge { rows: k, cols: k, cap: 64 })?;
        for idx in 0..count {
            let mut f = Vec::with_capacity(k + 1);
            let mut r = idx;
            for _ in 0..k {
                f.push((r % p as u64) as u32);
                r /= p as u64;
            }
            f.push(1);
            if k > 1 && f[0] == 0 {
                continue;
            }
            if is_irreducible(&f, p) {
                return Ok(GaloisField { p, k, modulus: f });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.k as u32)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn pad(&self, mut v: Vec<u32>) -> Elem {
        v.resize(self.k, 0);
        v
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.k]
    }

    pub fn one(&self) -> Elem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Elem {
        let mut v = self.zero();
        v[0] = n.rem_euclid(self.p as i64) as u32;
        v
    }

    /// The generator `t` of the polynomial basis.
    pub fn gen(&self) -> Elem {
        if self.k == 1 {
            // t ≡ -f_0
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut v = self.zero();
        v[1] = 1;
        v
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub fn scale(&self, c: u32, a: &Elem) -> Elem {
        a.iter().map(|x| (c as u64 * *x as u64 % self.p as u64) as u32).collect()
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.pad(poly_mulmod(a, b, &self.modulus, self.p))
    }

    pub fn pow(&self, a: &Elem, e: u64) -> Elem {
        self.pad(poly_powmod(a, e, &self.modulus, self.p))
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// `x ↦ x^{p^j}`.
    pub fn frobenius(&self, a: &Elem, j: usize) -> Elem {
        let mut y = a.clone();
        for _ in 0..j {
            y = self.pow(&y, self.p as u64);
        }
        y
    }

    /// `Tr_{F_{p^k}/F_{p^s}}(a) = Σ_{i < k/s} a^{p^{s i}}` (needs `s | k`).
    pub fn relative_trace(&self, a: &Elem, s: usize) -> Elem {
        assert!(s > 0 && self.k.is_multiple_of(s), "subfield degree must divide the field degree");
        let mut acc = self.zero();
        let mut y = a.clone();
        for _ in 0..self.k / s {
            acc = self.add(&acc, &y);
            y = self.frobenius(&y, s);
        }
        acc
    }

    /// Absolute trace as a residue in `F_p`.
    pub fn trace(&self, a: &Elem) -> u32 {
        self.relative_trace(a, 1)[0]
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    /// Element with base-`p` digit expansion `i`.
    pub fn element(&self, mut i: u64) -> Elem {
        let mut v = self.zero();
        for x in v.iter_mut() {
            *x = (i % self.p as u64) as u32;
            i /= self.p as u64;
        }
        v
    }

    pub fn index(&self, a: &Elem) -> u64 {
        a.iter().rev().fold(0u64, |acc, &x| acc * self.p as u64 + x as u64)
    }

    pub fn mult_order(&self, a: &Elem) -> u64 {
        let n = self.order() - 1;
        let one = self.one();
        let mut best = n;
        for d in divisors(n) {
            if self.pow(a, d) == one {
                best = best.min(d);
            }
        }
        best
    }

    /// A generator of the multiplicative group (smallest index).
    pub fn primitive_element(&self) -> Elem {
        let n = self.order() - 1;
        (1..self.order()).map(|i| self.element(i)).find(|a| self.mult_order(a) == n).expect("cyclic group")
    }

    /// A primitive `h`-th root of unity (needs `h | p^k - 1`).
    pub fn root_of_unity(&self, h: u64) -> Result<Elem> {
        let n = self.order() - 1;
        if !n.is_multiple_of(h) {
            return Err(Error::InvalidInput(format!("{h} does not divide {n}")));
        }
        Ok(self.pow(&self.primitive_element(), n / h))
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..=n).filter(|i| n.is_multiple_of(*i)).collect();
    d.sort();
    d
}

/// Solve `M x = 0` over `F_p`; returns a basis of the nullspace.
pub fn nullspace_mod_p(rows: &[Vec<u32>], ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = (*x as u64 * inv as u64 % p as u64) as u32;
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..ncols {
                    let sub = (f as u64 * m[r][j] as u64 % p as u64) as u32;
                    m[i][j] = (m[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u32; ncols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[i][f]) % p;
            }
            v
        })
        .collect()
}
