//! Type-A principal data, ad-spectra of stable elements, and static
//! root-system tables.

use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::{nth_root, teichmuller, PAdic};

/// Principal grading data of `sl_n` in its companion realization.
#[derive(Debug, Clone, Serialize)]
pub struct PrincipalData {
    pub n: usize,
    /// Coxeter number `h = n`.
    pub h: usize,
    /// Superdiagonal ones (`X_1`); zero for `n = 1`.
    pub x1: Matrix,
    /// `E_{n,1}` (`X_{1-h}`); the scalar 1 for `n = 1`.
    pub xlow: Matrix,
    /// Integer grading weights `w_i = n - 1 - i`: conjugation by
    /// `diag(c^{w_i})` multiplies `X_1` by `c`.
    pub rho_weights: Vec<i64>,
    /// Fundamental degrees `2, …, n`.
    pub degrees: Vec<usize>,
}

impl PrincipalData {
    pub fn new(n: usize, p: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("rank parameter n must be ≥ 1".into()));
        }
        let mut x1 = Matrix::zeros(p, n, n);
        for i in 0..n.saturating_sub(1) {
            x1.set(i, i + 1, PAdic::one(p));
        }
        let xlow = Matrix::unit(p, n, n - 1, 0);
        Ok(PrincipalData {
            n,
            h: n,
            x1,
            xlow,
            rho_weights: (0..n as i64).map(|i| n as i64 - 1 - i).collect(),
            degrees: (2..=n).collect(),
        })
    }

    /// Traceless `ρ̌ = diag((n-1)/2 - i)`.
    pub fn rho_check(&self, prec: i64) -> Result<Matrix> {
        let p = self.x1.p();
        let entries = (0..self.n)
            .map(|i| PAdic::from_ratio(p, &((self.n as i64 - 1 - 2 * i as i64).into()), &2.into(), prec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::diagonal(&entries))
    }

    /// `X_1 + c·X_low`.
    pub fn stable_element(&self, c: &PAdic) -> Matrix {
        self.x1.add(&self.xlow.scale(c))
    }
}

/// Ad-eigenvalue `c^{1/n}(ζ_n^i - ζ_n^j)`, stored symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RootDifference {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdSpectrum {
    pub n: usize,
    /// Multiplicity of the eigenvalue 0 (the Cartan part, `n - 1`).
    pub zeros: usize,
    /// The `n(n-1)` nonzero eigenvalues.
    pub roots: Vec<RootDifference>,
    /// Embedding in `K` when `ζ_n` and `c^{1/n}` lie in `K`.
    pub numeric: Option<Vec<PAdic>>,
}

impl AdSpectrum {
    /// Image of the spectrum under multiplication by `ζ_n`.
    pub fn rotate(&self) -> Vec<RootDifference> {
        self.roots.iter().map(|r| RootDifference { i: (r.i + 1) % self.n, j: (r.j + 1) % self.n }).collect()
    }

    /// Closure under negation: `(i, j) ↦ (j, i)`.
    pub fn negated(&self) -> Vec<RootDifference> {
        self.roots.iter().map(|r| RootDifference { i: r.j, j: r.i }).collect()
    }
}

/// Spectrum of `ad(X_1 + c X_low)` on `sl_n`.
pub fn stable_spectrum(n: usize, c: &PAdic, prec: i64) -> Result<AdSpectrum> {
    if c.is_zero() {
        return Err(Error::NotStable("X_1 + c·X_low is nilpotent for c = 0".into()));
    }
    let roots: Vec<RootDifference> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| RootDifference { i, j }))
        .collect();
    let p = c.p();
    let numeric = if n == 1 {
        Some(Vec::new())
    } else if (p as usize - 1).is_multiple_of(n) {
        nth_root(c, n as u32, prec).map(|r| {
            let g = (1..p as u64)
                .find(|&g| crate::ffield::mult_order(g, p as u64) == n as u64)
                .expect("μ_n ⊂ F_p^×");
            let z = teichmuller(p, g, prec);
            let eig: Vec<PAdic> = (0..n).map(|i| r.mul(&z.pow(i as u64))).collect();
            roots.iter().map(|d| eig[d.i].sub(&eig[d.j])).collect()
        })
    } else {
        None
    };
    Ok(AdSpectrum { n, zeros: n - 1, roots, numeric })
}

/// One row of the root-system table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRow {
    #[serde(rename = "type")]
    pub name: String,
    pub rank: u32,
    pub coxeter: u32,
    pub roots: u32,
    pub weyl_order: u64,
    pub degrees: String,
    pub g_diff: String,
    pub min_dim: u32,
    pub center_order: u32,
}

impl TypeRow {
    pub fn degree_list(&self) -> Vec<u32> {
        self.degrees.split_whitespace().map(|d| d.parse().expect("table degree")).collect()
    }

    pub fn family(&self) -> char {
        self.name.chars().next().unwrap()
    }

    /// `dim g = ♯Φ + r`.
    pub fn dimension(&self) -> u32 {
        self.roots + self.rank
    }
}

const TABLE_CSV: &str = include_str!("../data/tables.csv");

pub fn tables() -> &'static [TypeRow] {
    static TABLE: OnceLock<Vec<TypeRow>> = OnceLock::new();
    TABLE.get_or_init(|| {
        csv::Reader::from_reader(TABLE_CSV.as_bytes())
            .deserialize()
            .collect::<std::result::Result<Vec<TypeRow>, _>>()
            .expect("bundled table parses")
    })
}

/// Normalise `"E_6"`, `"e6"`, `"E6"` to `"E6"`.
pub fn normalize_type(name: &str) -> String {
    name.chars().filter(|c| !matches!(c, '_' | ' ')).collect::<String>().to_uppercase()
}

pub fn lookup(name: &str) -> Result<&'static TypeRow> {
    let key = normalize_type(name);
    tables().iter().find(|r| r.name == key).ok_or_else(|| Error::UnknownType(name.to_string()))
}

/// `♯Z_G(F_q)` for the simply connected form.
pub fn center_count_zq(name: &str, q: u64) -> Result<u64> {
    let row = lookup(name)?;
    let g = |k: u64| k.gcd(&(q - 1));
    Ok(match row.family() {
        'A' => g(row.rank as u64 + 1),
        'B' | 'C' => g(2),
        'D' => {
            if row.rank % 2 == 0 {
                g(2) * g(2)
            } else {
                g(4)
            }
        }
        'E' => match row.rank {
            6 => g(3),
            7 => g(2),
            _ => 1,
        },
        _ => 1,
    })
}

/// `♯Φ / h` as a rational (the rank for every table row).
pub fn roots_over_coxeter(row: &TypeRow) -> Ratio<u64> {
    Ratio::new(row.roots as u64, row.coxeter as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Comparison;

    #[test]
    fn principal_shapes() {
        let d = PrincipalData::new(2, 5).unwrap();
        assert_eq!(d.x1, Matrix::unit(5, 2, 0, 1));
        assert_eq!(d.xlow, Matrix::unit(5, 2, 1, 0));
        assert_eq!(d.h, 2);
        let d3 = PrincipalData::new(3, 5).unwrap();
        let cp = d3.stable_element(&PAdic::one(5)).char_poly();
        assert_eq!(cp[0].compare(&PAdic::from_int(5, -1)), Comparison::Equal);
        assert!(cp[1].is_exact_zero() && cp[2].is_exact_zero());
    }

    #[test]
    fn grading_scales_x1() {
        let p = 7;
        for n in 2..5 {
            let d = PrincipalData::new(n, p).unwrap();
            let c = PAdic::from_int(p, 3);
            let g = Matrix::diagonal(&d.rho_weights.iter().map(|&w| c.pow(w as u64)).collect::<Vec<_>>());
            let ginv = g.inverse(30).unwrap();
            let lhs = g.mul(&d.x1).mul(&ginv);
            assert!(lhs.sub(&d.x1.scale(&c)).is_zero());
        }
    }

    #[test]
    fn sl2_spectrum() {
        let s = stable_spectrum(2, &PAdic::one(5), 30).unwrap();
        assert_eq!(s.zeros, 1);
        let num = s.numeric.unwrap();
        assert_eq!(num.len(), 2);
        let mut vals: Vec<i64> = num.iter().map(|x| if x.agrees_mod(&PAdic::from_int(5, 2), 30) { 2 } else { -2 }).collect();
        vals.sort();
        assert_eq!(vals, vec![-2, 2]);
        assert!(num.iter().all(|x| x.val_pi() == Some(0)));
        assert!(matches!(stable_spectrum(2, &PAdic::zero(5), 30), Err(Error::NotStable(_))));
    }

    #[test]
    fn spectrum_symmetries() {
        let s = stable_spectrum(4, &PAdic::one(5), 30).unwrap();
        let mut a = s.roots.clone();
        let mut r = s.rotate();
        a.sort();
        r.sort();
        assert_eq!(a, r);
        let mut ng = s.negated();
        ng.sort();
        assert_eq!(a, ng);
        let num = s.numeric.unwrap();
        let total = num.iter().fold(PAdic::zero(5), |acc, x| acc.add(x));
        assert!(total.is_zero());
        assert!(num.iter().all(|x| x.val_pi() == Some(0)));
    }

    #[test]
    fn table_rows() {
        assert_eq!(lookup("E_6").unwrap().g_diff, "F4");
        assert_eq!(lookup("G2").unwrap().min_dim, 7);
        let a2 = lookup("A2").unwrap();
        assert_eq!((a2.roots, a2.coxeter), (6, 3));
        for row in tables() {
            assert_eq!(row.roots, row.rank * row.coxeter, "{}", row.name);
            assert_eq!(row.degree_list().len() as u32, row.rank);
            // Σ (d_i - 1) = ♯Φ/2, Π d_i = |W|
            assert_eq!(row.degree_list().iter().map(|d| d - 1).sum::<u32>(), row.roots / 2);
            assert_eq!(row.degree_list().iter().map(|&d| d as u64).product::<u64>(), row.weyl_order);
        }
        assert!(matches!(lookup("Q7"), Err(Error::UnknownType(_))));
    }

    #[test]
    fn center_counts() {
        assert_eq!(center_count_zq("A1", 5).unwrap(), 2);
        assert_eq!(center_count_zq("A2", 7).unwrap(), 3);
        assert_eq!(center_count_zq("E8", 11).unwrap(), 1);
        for row in tables() {
            for q in [5u64, 7, 9, 11, 13, 25] {
                assert_eq!(row.center_order as u64 % center_count_zq(&row.name, q).unwrap(), 0);
            }
        }
    }

    #[test]
    fn center_a1_brute_force() {
        // μ_2(F_q) in SL_2: scalars x with x^2 = 1
        for q in [5u64, 7, 11, 13] {
            let count = (1..q).filter(|x| x * x % q == 1).count() as u64;
            assert_eq!(center_count_zq("A1", q).unwrap(), count);
        }
    }
}
