//! Simple wild parameters: the group `Γ = ⟨s, t | s^h, t^{dh}, tst⁻¹ = s^q⟩`,
//! its action on `𝔉 = F_{q^{dh}}` and `D_1 = F_p(ζ_h)`, and the counts of
//! equivariant maps and equivalence classes.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{mult_order, nullspace_mod_p, prime_power, Elem, GaloisField};
use crate::lie::{center_count_zq, lookup};

/// Cap on the `F_p`-dimension of `𝔉` and on the number of unknowns.
pub const SYSTEM_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaData {
    pub p: u32,
    pub q: u64,
    pub h: u64,
    /// `q = p^f`.
    pub f: u32,
    /// Order of `q` in `(Z/h)^×`.
    pub d: u64,
    /// Order of `p` in `(Z/h)^×`.
    pub a: u64,
}

impl GammaData {
    /// `[𝔉 : F_p] = f·d·h`.
    pub fn field_degree(&self) -> usize {
        (self.f as u64 * self.d * self.h) as usize
    }
}

pub fn gamma_data(p: u32, q: u64, h: u64) -> Result<GammaData> {
    let (pp, f) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("q = {q} is not a prime power")))?;
    if pp != p {
        return Err(Error::InvalidInput(format!("q = {q} is not a power of p = {p}")));
    }
    if h == 0 {
        return Err(Error::InvalidInput("h must be ≥ 1".into()));
    }
    if h.is_multiple_of(p as u64) {
        return Err(Error::HypothesisViolation(format!("gcd(p, h) ≠ 1 for p = {p}, h = {h}")));
    }
    let d = mult_order(q % h, h);
    let a = mult_order(p as u64 % h, h);
    Ok(GammaData { p, q, h, f, d, a })
}

type Mat = Vec<Vec<u32>>;

fn mat_mul(a: &Mat, b: &Mat, p: u32) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| ((0..k).map(|l| a[i][l] as u64 * b[l][j] as u64).sum::<u64>() % p as u64) as u32).collect())
        .collect()
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u32).collect()).collect()
}

fn mat_pow(a: &Mat, mut e: u64, p: u32) -> Mat {
    let mut r = identity(a.len());
    let mut b = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            r = mat_mul(&r, &b, p);
        }
        b = mat_mul(&b, &b, p);
        e >>= 1;
    }
    r
}

/// The `Γ`-module `𝔉` with `s = ·ζ_h` and `t = (·)^q`, as `F_p`-matrices
/// on the power basis.
#[derive(Debug, Clone)]
pub struct GammaModule {
    pub gamma: GammaData,
    pub field: GaloisField,
    pub zeta: Elem,
    pub s_action: Mat,
    pub t_action: Mat,
}

impl GammaModule {
    pub fn new(gamma: &GammaData) -> Result<Self> {
        let e = gamma.field_degree();
        if e > SYSTEM_CAP {
            return Err(Error::TooLarge { rows: e, cols: e, cap: SYSTEM_CAP });
        }
        let field = GaloisField::new(gamma.p, e)?;
        let zeta = field.root_of_unity(gamma.h)?;
        let cols = |g: &dyn Fn(&Elem) -> Elem| -> Mat {
            let images: Vec<Elem> = (0..e).map(|j| g(&basis(&field, j))).collect();
            (0..e).map(|i| (0..e).map(|j| images[j][i]).collect()).collect()
        };
        let s_action = cols(&|x| field.mul(&zeta, x));
        let t_action = cols(&|x| field.frobenius(x, gamma.f as usize));
        Ok(GammaModule { gamma: gamma.clone(), field, zeta, s_action, t_action })
    }

    /// `s^h = 1`, `t^{dh} = 1`, `t s = s^q t`.
    pub fn check_presentation(&self) -> bool {
        let p = self.gamma.p;
        let e = self.s_action.len();
        let id = identity(e);
        mat_pow(&self.s_action, self.gamma.h, p) == id
            && mat_pow(&self.t_action, self.gamma.d * self.gamma.h, p) == id
            && mat_mul(&self.t_action, &self.s_action, p) == mat_mul(&mat_pow(&self.s_action, self.gamma.q, p), &self.t_action, p)
    }

    /// Matrix of `x ↦ (·)^{p^j}`.
    fn frobenius_matrix(&self, j: usize) -> Mat {
        let e = self.field.degree();
        let images: Vec<Elem> = (0..e).map(|c| self.field.frobenius(&basis(&self.field, c), j)).collect();
        (0..e).map(|i| (0..e).map(|c| images[c][i]).collect()).collect()
    }

    /// Matrix of `x ↦ Tr_{𝔉/D_1}(a·x)`.
    pub fn trace_map(&self, a: &Elem) -> Mat {
        let e = self.field.degree();
        let images: Vec<Elem> =
            (0..e).map(|c| self.field.relative_trace(&self.field.mul(a, &basis(&self.field, c)), self.gamma.a as usize)).collect();
        (0..e).map(|i| (0..e).map(|c| images[c][i]).collect()).collect()
    }

    /// `f` commutes with `s`, `t` and lands in `D_1`.
    pub fn is_equivariant(&self, f: &Mat) -> bool {
        let p = self.gamma.p;
        let e = f.len();
        let proj = sub(&self.frobenius_matrix(self.gamma.a as usize), &identity(e), p);
        mat_mul(f, &self.s_action, p) == mat_mul(&self.s_action, f, p)
            && mat_mul(f, &self.t_action, p) == mat_mul(&self.t_action, f, p)
            && mat_mul(&proj, f, p).iter().flatten().all(|&x| x == 0)
    }
}

fn basis(field: &GaloisField, j: usize) -> Elem {
    let mut v = field.zero();
    v[j] = 1;
    v
}

fn sub(a: &Mat, b: &Mat, p: u32) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u + p - v) % p).collect()).collect()
}

/// Solution space of `Hom_{F_p[Γ]}(𝔉, D_1)`.
#[derive(Debug, Clone)]
pub struct HomSpace {
    pub module: GammaModule,
    /// `F_p`-basis of the solutions, as `e × e` matrices on `𝔉`.
    pub basis: Vec<Mat>,
}

impl HomSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn total(&self) -> u64 {
        (self.module.gamma.p as u64).pow(self.dimension() as u32)
    }

    /// All solutions (`p^dim` of them).
    pub fn solutions(&self) -> Vec<Mat> {
        let p = self.module.gamma.p;
        let e = self.module.field.degree();
        let mut out = vec![vec![vec![0u32; e]; e]];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * p as usize);
            for f in &out {
                for c in 0..p {
                    next.push(f.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u + c * v) % p).collect()).collect());
                }
            }
            out = next;
        }
        out
    }
}

pub fn hom_space(p: u32, q: u64, h: u64) -> Result<HomSpace> {
    let gamma = gamma_data(p, q, h)?;
    let module = GammaModule::new(&gamma)?;
    let e = module.field.degree();
    // D_1 = ker(Frob^a − 1) ⊂ 𝔉; write f = B·g
    let proj = sub(&module.frobenius_matrix(gamma.a as usize), &identity(e), p);
    let d1 = nullspace_mod_p(&proj, e, p);
    let ed = d1.len();
    let cols = ed * e;
    if cols > SYSTEM_CAP {
        return Err(Error::TooLarge { rows: 2 * e * e, cols, cap: SYSTEM_CAP });
    }
    let b: Mat = (0..e).map(|i| (0..ed).map(|r| d1[r][i]).collect()).collect();
    let mut rows = Vec::with_capacity(2 * e * e);
    for op in [&module.s_action, &module.t_action] {
        let ob = mat_mul(op, &b, p);
        for i in 0..e {
            for j in 0..e {
                // (B g op − op B g)[i][j]
                let mut row = vec![0u32; cols];
                for r in 0..ed {
                    for c in 0..e {
                        let mut v = b[i][r] as u64 * op[c][j] as u64 % p as u64;
                        if c == j {
                            v = (v + p as u64 - ob[i][r] as u64) % p as u64;
                        }
                        row[r * e + c] = v as u32;
                    }
                }
                rows.push(row);
            }
        }
    }
    let sols = nullspace_mod_p(&rows, cols, p);
    let basis = sols
        .iter()
        .map(|g| {
            let gm: Mat = (0..ed).map(|r| g[r * e..(r + 1) * e].to_vec()).collect();
            mat_mul(&b, &gm, p)
        })
        .collect();
    Ok(HomSpace { module, basis })
}

/// `(#Hom, #nonzero Hom)`.
pub fn hom_count(p: u32, q: u64, h: u64) -> Result<(u64, u64)> {
    let t = hom_space(p, q, h)?.total();
    Ok((t, t - 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceFormCheck {
    pub ok: bool,
    /// Number of `a ∈ F_q` producing pairwise distinct equivariant maps.
    pub a_values: u64,
    pub solutions: u64,
    pub counterexample: Option<String>,
}

/// Every equivariant map is `Tr_{𝔉/D_1}(a·−)` for a unique `a ∈ F_q`.
pub fn trace_form_check(p: u32, q: u64, h: u64) -> Result<TraceFormCheck> {
    let hs = hom_space(p, q, h)?;
    let m = &hs.module;
    let fq = fixed_subfield(m);
    let mut maps = BTreeSet::new();
    for a in &fq {
        let f = m.trace_map(a);
        if !m.is_equivariant(&f) {
            return Ok(TraceFormCheck {
                ok: false,
                a_values: maps.len() as u64,
                solutions: hs.total(),
                counterexample: Some(format!("Tr(a·−) is not equivariant for a = {a:?}")),
            });
        }
        maps.insert(f);
    }
    let sols: BTreeSet<Mat> = hs.solutions().into_iter().collect();
    let missing = sols.difference(&maps).next().cloned();
    Ok(TraceFormCheck {
        ok: maps.len() as u64 == q && missing.is_none() && maps.is_subset(&sols),
        a_values: maps.len() as u64,
        solutions: hs.total(),
        counterexample: missing.map(|f| format!("solution {f:?} is not a trace form")),
    })
}

/// `F_q = {x ∈ 𝔉 : x^q = x}`.
fn fixed_subfield(m: &GammaModule) -> Vec<Elem> {
    let p = m.gamma.p;
    let e = m.field.degree();
    let ker = nullspace_mod_p(&sub(&m.t_action, &identity(e), p), e, p);
    let mut out = vec![m.field.zero()];
    for b in &ker {
        let mut next = Vec::new();
        for x in &out {
            for c in 0..p {
                next.push(m.field.add(x, &m.field.scale(c, b)));
            }
        }
        out = next;
    }
    out
}

/// `F_q^×` acting by precomposition with scaling is simply transitive on
/// the nonzero maps.
pub fn scalar_action_transitive(hs: &HomSpace) -> bool {
    let m = &hs.module;
    let p = m.gamma.p;
    let nonzero: BTreeSet<Mat> = hs.solutions().into_iter().filter(|f| f.iter().flatten().any(|&x| x != 0)).collect();
    let Some(f0) = nonzero.iter().next() else { return false };
    let e = m.field.degree();
    let units: Vec<Elem> = fixed_subfield(m).into_iter().filter(|x| !m.field.is_zero(x)).collect();
    let orbit: BTreeSet<Mat> = units
        .iter()
        .map(|c| {
            let images: Vec<Elem> = (0..e).map(|j| m.field.mul(c, &basis(&m.field, j))).collect();
            let sc: Mat = (0..e).map(|i| (0..e).map(|j| images[j][i]).collect()).collect();
            mat_mul(f0, &sc, p)
        })
        .collect();
    orbit == nonzero && orbit.len() == units.len()
}

/// `Z(q)·(q − 1)`.
pub fn class_count(type_name: &str, q: u64) -> Result<u64> {
    let row = lookup(type_name)?;
    let (p, _) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("q = {q} is not a prime power")))?;
    if row.weyl_order % p as u64 == 0 {
        return Err(Error::HypothesisViolation(format!("p = {p} divides |W({})| = {}", row.name, row.weyl_order)));
    }
    Ok(center_count_zq(type_name, q)? * (q - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        let g = gamma_data(5, 5, 2).unwrap();
        assert_eq!((g.d, g.a), (1, 1));
        let g = gamma_data(5, 5, 3).unwrap();
        assert_eq!((g.d, g.a), (2, 2));
        let g = gamma_data(7, 7, 6).unwrap();
        assert_eq!((g.d, g.a), (1, 1));
        assert!(matches!(gamma_data(5, 5, 10), Err(Error::HypothesisViolation(_))));
        assert!(gamma_data(5, 7, 2).is_err());
    }

    #[test]
    fn presentation_holds() {
        for (p, q, h) in [(5, 5, 2), (5, 5, 3), (7, 7, 2), (7, 7, 3), (3, 9, 2)] {
            let m = GammaModule::new(&gamma_data(p, q, h).unwrap()).unwrap();
            assert!(m.check_presentation(), "{p} {q} {h}");
        }
    }

    #[test]
    fn hom_examples() {
        assert_eq!(hom_count(5, 5, 2).unwrap(), (5, 4));
        assert_eq!(hom_count(5, 5, 3).unwrap(), (5, 4));
        assert_eq!(hom_count(7, 7, 2).unwrap(), (7, 6));
    }

    #[test]
    fn trace_forms() {
        for (p, q, h) in [(5, 5, 2), (5, 5, 3), (7, 7, 2)] {
            let c = trace_form_check(p, q, h).unwrap();
            assert!(c.ok, "{p} {q} {h}: {c:?}");
            assert_eq!(c.a_values, q);
        }
    }

    #[test]
    fn trace_outside_fq_not_equivariant() {
        let m = GammaModule::new(&gamma_data(5, 5, 2).unwrap()).unwrap();
        let g = m.field.gen();
        assert!(m.field.pow(&g, 5) != g);
        assert!(!m.is_equivariant(&m.trace_map(&g)));
        assert!(m.is_equivariant(&m.trace_map(&m.field.one())));
    }

    #[test]
    fn scalar_action() {
        for (p, q, h) in [(5, 5, 2), (5, 5, 3), (7, 7, 2)] {
            assert!(scalar_action_transitive(&hom_space(p, q, h).unwrap()));
        }
    }

    #[test]
    fn class_examples() {
        assert_eq!(class_count("A1", 5).unwrap(), 8);
        assert_eq!(class_count("A2", 7).unwrap(), 18);
        assert_eq!(class_count("E8", 11).unwrap(), 10);
        assert!(matches!(class_count("A2", 3), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn too_large() {
        assert!(matches!(hom_count(5, 25, 24), Err(Error::TooLarge { .. })));
    }
}
