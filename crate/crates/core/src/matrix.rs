//! Dense matrices over `K` and truncated matrix series.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PAdic;
use crate::series::PadicSeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<PAdic>,
}

impl Matrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Matrix { p, rows, cols, data: vec![PAdic::zero(p); rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, PAdic::one(p));
        }
        m
    }

    pub fn scalar(c: &PAdic, n: usize) -> Self {
        let mut m = Self::zeros(c.p(), n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn from_fn(p: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> PAdic) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { p, rows, cols, data }
    }

    pub fn from_ints(p: u32, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(p, r, c, |i, j| PAdic::from_int(p, rows[i][j]))
    }

    pub fn diagonal(entries: &[PAdic]) -> Self {
        let n = entries.len();
        let p = entries.first().map_or(2, |e| e.p());
        let mut m = Self::zeros(p, n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// `E_{ij}` (0-based).
    pub fn unit(p: u32, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        m.set(i, j, PAdic::one(p));
        m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PAdic {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PAdic) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[PAdic] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&PAdic) -> PAdic) -> Matrix {
        Matrix { p: self.p, rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        Matrix { p: self.p, rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        Matrix { p: self.p, rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.map(|x| x.neg())
    }

    pub fn scale(&self, c: &PAdic) -> Matrix {
        self.map(|x| x.mul(c))
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let mut out = Matrix::zeros(self.p, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_exact_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        out
    }

    /// `[self, o]`.
    pub fn bracket(&self, o: &Matrix) -> Matrix {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> PAdic {
        (0..self.rows.min(self.cols)).fold(PAdic::zero(self.p), |acc, i| acc.add(self.get(i, i)))
    }

    /// All entries zero at their precision.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_exact_zero())
    }

    /// Minimal entry valuation in π-units (`None` if zero at precision).
    pub fn val_pi(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.val_pi()).min()
    }

    pub fn truncate(&self, abs: i64) -> Matrix {
        self.map(|x| x.truncate(abs))
    }

    pub fn with_rel_prec(&self, rel: i64) -> Matrix {
        self.map(|x| x.with_rel_prec(rel))
    }

    /// Inverse by Gauss–Jordan elimination with minimal-valuation pivots.
    pub fn inverse(&self, prec: i64) -> Result<Matrix> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(self.p, n));
        aug.row_reduce(n, prec)?;
        Ok(Matrix::from_fn(self.p, n, n, |i, j| aug.get(i, n + j).clone()))
    }

    /// Solve `self · x = b` for square `self`.
    pub fn solve(&self, b: &Matrix, prec: i64) -> Result<Matrix> {
        assert!(self.is_square() && b.rows == self.rows, "shape mismatch");
        let n = self.rows;
        let mut aug = self.hstack(b);
        aug.row_reduce(n, prec)?;
        Ok(Matrix::from_fn(self.p, n, b.cols, |i, j| aug.get(i, n + j).clone()))
    }

    fn hstack(&self, o: &Matrix) -> Matrix {
        Matrix::from_fn(self.p, self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols { self.get(i, j).clone() } else { o.get(i, j - self.cols).clone() }
        })
    }

    /// Reduce the first `n` columns to the identity.
    fn row_reduce(&mut self, n: usize, prec: i64) -> Result<()> {
        for c in 0..n {
            let piv = (c..n)
                .filter_map(|r| self.get(r, c).val_pi().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
                .ok_or_else(|| Error::InsufficientPrecision(format!("matrix is singular at precision (column {c})")))?;
            if piv != c {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, c * self.cols + j);
                }
            }
            let inv = self.get(c, c).inv_prec(prec)?;
            for j in 0..self.cols {
                let v = self.get(c, j).mul(&inv);
                self.set(c, j, v);
            }
            for r in 0..n {
                if r == c || self.get(r, c).is_exact_zero() {
                    continue;
                }
                let f = self.get(r, c).clone();
                for j in 0..self.cols {
                    let v = self.get(r, j).sub(&f.mul(self.get(c, j)));
                    self.set(r, j, v);
                }
            }
        }
        Ok(())
    }

    /// Characteristic polynomial `det(t I - self)` (division-free, Berkowitz);
    /// coefficients from `t^0` to `t^n`.
    pub fn char_poly(&self) -> Vec<PAdic> {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.p;
        // Berkowitz: c(t) built from successive leading principal submatrices
        let mut poly = vec![PAdic::one(p)]; // high-to-low: [1]
        for k in 0..n {
            // A_k = leading (k+1)x(k+1); split a = A[k][k], R = row k (cols < k), C = col k (rows < k), M = leading k×k
            let a = self.get(k, k).clone();
            let m = Matrix::from_fn(p, k, k, |i, j| self.get(i, j).clone());
            let r: Vec<PAdic> = (0..k).map(|j| self.get(k, j).clone()).collect();
            let col: Vec<PAdic> = (0..k).map(|i| self.get(i, k).clone()).collect();
            // Toeplitz column: 1, -a, -R C, -R M C, -R M^2 C, ...
            let mut t = vec![PAdic::one(p), a.neg()];
            let mut v = col.clone();
            for _ in 0..k {
                let rc = r.iter().zip(&v).fold(PAdic::zero(p), |acc, (x, y)| acc.add(&x.mul(y)));
                t.push(rc.neg());
                v = (0..k).map(|i| (0..k).fold(PAdic::zero(p), |acc, j| acc.add(&m.get(i, j).mul(&v[j])))).collect();
            }
            // new = T · poly (T lower-triangular Toeplitz of size (k+2)×(k+1))
            let mut next = vec![PAdic::zero(p); k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, pj) in poly.iter().enumerate() {
                    if i >= j && i - j < t.len() {
                        *slot = slot.add(&t[i - j].mul(pj));
                    }
                }
            }
            poly = next;
        }
        poly.reverse();
        poly
    }

    pub fn det(&self) -> PAdic {
        let cp = self.char_poly();
        let n = self.rows;
        if n.is_multiple_of(2) { cp[0].clone() } else { cp[0].neg() }
    }

    /// Flatten to a column vector (row-major).
    pub fn vec(&self) -> Vec<PAdic> {
        self.data.clone()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `Σ_{k ≥ lowest} M_k s^k`, known below `trunc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatSeries {
    pub n: usize,
    pub p: u32,
    pub lowest: i64,
    pub coeffs: Vec<Matrix>,
    pub trunc: i64,
}

impl MatSeries {
    pub fn new(p: u32, n: usize, lowest: i64, coeffs: Vec<Matrix>, trunc: i64) -> Self {
        let mut s = MatSeries { n, p, lowest, coeffs, trunc };
        let keep = (trunc - lowest).max(0) as usize;
        s.coeffs.truncate(keep);
        s
    }

    pub fn constant(m: Matrix, trunc: i64) -> Self {
        Self::new(m.p(), m.rows(), 0, vec![m], trunc)
    }

    /// Coefficient of `s^k` (zero outside the stored range; `k < trunc` expected).
    pub fn coeff(&self, k: i64) -> Matrix {
        if k < self.lowest || k >= self.lowest + self.coeffs.len() as i64 {
            Matrix::zeros(self.p, self.n, self.n)
        } else {
            self.coeffs[(k - self.lowest) as usize].clone()
        }
    }

    fn coeff_ref(&self, k: i64) -> Option<&Matrix> {
        if k < self.lowest || k >= self.lowest + self.coeffs.len() as i64 {
            None
        } else {
            Some(&self.coeffs[(k - self.lowest) as usize])
        }
    }

    pub fn end(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64
    }

    pub fn add(&self, o: &MatSeries) -> MatSeries {
        let trunc = self.trunc.min(o.trunc);
        let lo = self.lowest.min(o.lowest);
        let hi = self.end().max(o.end()).min(trunc);
        let coeffs = (lo..hi.max(lo)).map(|k| self.coeff(k).add(&o.coeff(k))).collect();
        MatSeries::new(self.p, self.n, lo, coeffs, trunc)
    }

    pub fn sub(&self, o: &MatSeries) -> MatSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest, self.coeffs.iter().map(|m| m.neg()).collect(), self.trunc)
    }

    pub fn scale(&self, c: &PAdic) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest, self.coeffs.iter().map(|m| m.scale(c)).collect(), self.trunc)
    }

    pub fn mul(&self, o: &MatSeries) -> MatSeries {
        let trunc = (self.trunc + o.lowest).min(o.trunc + self.lowest);
        let lo = self.lowest + o.lowest;
        let hi = (self.end() + o.end() - 1).min(trunc);
        let n = (hi - lo).max(0) as usize;
        let mut out = vec![Matrix::zeros(self.p, self.n, self.n); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        MatSeries::new(self.p, self.n, lo, out, trunc)
    }

    /// Left multiplication by a constant matrix.
    pub fn lmul(&self, m: &Matrix) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest, self.coeffs.iter().map(|c| m.mul(c)).collect(), self.trunc)
    }

    pub fn rmul(&self, m: &Matrix) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest, self.coeffs.iter().map(|c| c.mul(m)).collect(), self.trunc)
    }

    /// Multiply by `s^k`.
    pub fn shift(&self, k: i64) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest + k, self.coeffs.clone(), self.trunc + k)
    }

    pub fn truncate(&self, trunc: i64) -> MatSeries {
        MatSeries::new(self.p, self.n, self.lowest, self.coeffs.clone(), self.trunc.min(trunc))
    }

    /// `s ↦ s^k`.
    pub fn compose_pow(&self, k: i64) -> MatSeries {
        assert!(k >= 1);
        let zero = Matrix::zeros(self.p, self.n, self.n);
        let mut coeffs = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                coeffs.extend(std::iter::repeat_n(zero.clone(), (k - 1) as usize));
            }
            coeffs.push(c.clone());
        }
        MatSeries::new(self.p, self.n, self.lowest * k, coeffs, (self.trunc - 1) * k + 1)
    }

    pub fn derivative(&self) -> MatSeries {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c.scale(&PAdic::from_int(self.p, self.lowest + i as i64))).collect();
        MatSeries::new(self.p, self.n, self.lowest - 1, coeffs, self.trunc - 1)
    }

    pub fn theta_derivative(&self) -> MatSeries {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c.scale(&PAdic::from_int(self.p, self.lowest + i as i64))).collect();
        MatSeries::new(self.p, self.n, self.lowest, coeffs, self.trunc)
    }

    /// Inverse when the coefficient of `s^lowest` is invertible.
    pub fn inverse(&self, prec: i64) -> Result<MatSeries> {
        let v = self.lowest;
        let lead = self.coeff_ref(v).ok_or_else(|| Error::InsufficientPrecision("series is zero".into()))?;
        let li = lead.inverse(prec)?;
        // known from s^{-v} up to s^{trunc - 2v}
        let len = (self.trunc - v).max(0) as usize;
        let mut w: Vec<Matrix> = Vec::with_capacity(len);
        for m in 0..len {
            if m == 0 {
                w.push(li.clone());
                continue;
            }
            let mut acc = Matrix::zeros(self.p, self.n, self.n);
            for k in 1..=m {
                if let Some(c) = self.coeff_ref(v + k as i64) {
                    if !c.is_exact_zero() {
                        acc = acc.add(&c.mul(&w[m - k]));
                    }
                }
            }
            w.push(li.mul(&acc).neg());
        }
        Ok(MatSeries::new(self.p, self.n, -v, w, self.trunc - 2 * v))
    }

    /// Every coefficient below `upto` is zero at its precision.
    pub fn vanishes_below(&self, upto: i64) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| self.lowest + i as i64 >= upto || c.is_zero())
    }

    /// Minimal entry valuation of each coefficient.
    pub fn valuation_profile(&self) -> Vec<(i64, Option<i64>)> {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.lowest + i as i64, c.val_pi())).collect()
    }

    pub fn entry(&self, i: usize, j: usize, var: &str) -> PadicSeries {
        PadicSeries::new(self.p, var, self.lowest, self.coeffs.iter().map(|c| c.get(i, j).clone()).collect(), Some(self.trunc))
    }

    /// From a matrix of series sharing a variable; polynomial entries get `trunc`.
    pub fn from_entries(p: u32, entries: &[Vec<PadicSeries>], trunc: i64) -> MatSeries {
        let n = entries.len();
        let lo = entries.iter().flatten().map(|s| s.lowest()).min().unwrap_or(0).min(0);
        let mut t = trunc;
        for s in entries.iter().flatten() {
            if let Some(x) = s.trunc() {
                t = t.min(x);
            }
        }
        let hi = entries.iter().flatten().map(|s| s.end()).max().unwrap_or(lo).min(t);
        let coeffs = (lo..hi.max(lo))
            .map(|k| Matrix::from_fn(p, n, n, |i, j| entries[i][j].coeff(k).unwrap_or(PAdic::zero(p))))
            .collect();
        MatSeries::new(p, n, lo, coeffs, t)
    }

    pub fn to_entries(&self, var: &str) -> Vec<Vec<PadicSeries>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j, var)).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_companion() {
        // X1 + Xlow for n = 3 has char poly t^3 - 1
        let m = Matrix::from_ints(5, &[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        let cp = m.char_poly();
        let expect = [-1, 0, 0, 1];
        for (c, e) in cp.iter().zip(expect) {
            assert!(c.compare(&PAdic::from_int(5, e)) == crate::padic::Comparison::Equal);
        }
    }

    #[test]
    fn char_poly_generic() {
        let m = Matrix::from_ints(7, &[vec![2, 1, 3], vec![0, -1, 4], vec![5, 2, 1]]);
        let cp = m.char_poly();
        // trace 2, det = 2(-1-8) - 1(0-20) + 3(0+5) = -18 + 20 + 15 = 17
        assert!(cp[2].compare(&PAdic::from_int(7, -2)) == crate::padic::Comparison::Equal);
        assert!(m.det().compare(&PAdic::from_int(7, 17)) == crate::padic::Comparison::Equal);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_ints(5, &[vec![5, 1], vec![1, 3]]);
        let inv = m.inverse(30).unwrap();
        assert!(m.mul(&inv).sub(&Matrix::identity(5, 2)).is_zero());
        let sing = Matrix::from_ints(5, &[vec![1, 2], vec![2, 4]]);
        assert!(sing.inverse(30).is_err());
    }

    #[test]
    fn series_inverse() {
        let p = 5;
        let a = Matrix::from_ints(p, &[vec![1, 2], vec![0, 1]]);
        let b = Matrix::from_ints(p, &[vec![0, 1], vec![3, 0]]);
        let s = MatSeries::new(p, 2, 0, vec![a, b], 20);
        let inv = s.inverse(40).unwrap();
        let prod = s.mul(&inv);
        let id = MatSeries::constant(Matrix::identity(p, 2), 20);
        assert!(prod.sub(&id).vanishes_below(20));
    }
}
