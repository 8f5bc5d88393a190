//! Witt ghost components, Artin–Hasse exponentials, Dwork's θ_π and Pulita's
//! rank-one exponential modules (Witt length 0).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{linear_lower_bound, LinearBound};
use crate::padic::PAdic;
use crate::robba::RankOneModule;
use crate::series::PadicSeries;

/// Witt vector `(λ_0, …, λ_m)` with integer components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WittCoords {
    pub p: u32,
    pub components: Vec<BigInt>,
}

impl WittCoords {
    pub fn new(p: u32, components: Vec<i64>) -> Self {
        WittCoords { p, components: components.into_iter().map(BigInt::from).collect() }
    }

    /// Witt length `m` (number of components minus one).
    pub fn length(&self) -> usize {
        self.components.len().saturating_sub(1)
    }

    fn component(&self, j: usize) -> BigInt {
        self.components.get(j).cloned().unwrap_or_else(BigInt::zero)
    }
}

/// `ω_n(λ) = λ_0^{p^n} + p λ_1^{p^{n-1}} + … + p^n λ_n`; components beyond the
/// stored length count as zero.
pub fn ghost(lambda: &WittCoords, n: usize) -> BigInt {
    let p = BigInt::from(lambda.p);
    (0..=n).fold(BigInt::zero(), |acc, j| {
        let e = (lambda.p as u64).pow((n - j) as u32);
        acc + p.pow(j as u32) * pow_big(&lambda.component(j), e)
    })
}

fn pow_big(x: &BigInt, e: u64) -> BigInt {
    num_traits::pow::pow(x.clone(), e as usize)
}

/// Exact exponential of `Σ f_k T^k` (with `f_0 = 0`) below `trunc`.
pub fn exp_rational(f: &[BigRational], trunc: usize) -> Vec<BigRational> {
    let mut g = vec![BigRational::zero(); trunc];
    if trunc == 0 {
        return g;
    }
    g[0] = BigRational::one();
    for m in 1..trunc {
        let mut acc = BigRational::zero();
        for k in 1..=m.min(f.len().saturating_sub(1)) {
            if !f[k].is_zero() {
                acc += &f[k] * BigRational::from_integer(BigInt::from(k)) * &g[m - k];
            }
        }
        g[m] = acc / BigRational::from_integer(BigInt::from(m));
    }
    g
}

/// Exponent `Σ_{p^n < trunc} ω_n T^{p^n}/p^n` with the given ghost vector.
fn ghost_exponent(p: u32, ghosts: &[BigInt], trunc: usize) -> Vec<BigRational> {
    let mut f = vec![BigRational::zero(); trunc];
    let mut pn = 1usize;
    for w in ghosts {
        if pn >= trunc {
            break;
        }
        f[pn] = BigRational::new(w.clone(), BigInt::from(pn));
        pn = match pn.checked_mul(p as usize) {
            Some(x) => x,
            None => break,
        };
    }
    f
}

fn ghost_count(p: u32, trunc: usize) -> usize {
    let mut n = 0;
    let mut pn = 1usize;
    while pn < trunc {
        n += 1;
        pn *= p as usize;
    }
    n
}

/// Coefficients of `E(T)` below `trunc` as exact rationals.
pub fn artin_hasse_rational(p: u32, trunc: usize) -> Vec<BigRational> {
    // n a_n = Σ_{p^j ≤ n} a_{n - p^j}
    let mut a = vec![BigRational::zero(); trunc];
    if trunc == 0 {
        return a;
    }
    a[0] = BigRational::one();
    for n in 1..trunc {
        let mut acc = BigRational::zero();
        let mut pj = 1usize;
        while pj <= n {
            acc += &a[n - pj];
            pj *= p as usize;
        }
        a[n] = acc / BigRational::from_integer(BigInt::from(n));
    }
    a
}

fn rational_series(p: u32, var: &str, c: &[BigRational], prec: i64) -> Result<PadicSeries> {
    let coeffs = c.iter().map(|q| PAdic::from_rational(p, q, prec)).collect::<Result<Vec<_>>>()?;
    Ok(PadicSeries::new(p, var, 0, coeffs, Some(c.len() as i64)))
}

/// Artin–Hasse exponential `E(T)` below `trunc`, coefficients rounded to `prec` digits.
pub fn artin_hasse(p: u32, trunc: usize, prec: i64) -> Result<PadicSeries> {
    rational_series(p, "T", &artin_hasse_rational(p, trunc), prec)
}

/// `E(λ, T) = Π_j E(λ_j T^{p^j}) = exp(Σ_n ω_n(λ) T^{p^n}/p^n)`, exact.
pub fn relative_artin_hasse_rational(lambda: &WittCoords, trunc: usize) -> Vec<BigRational> {
    let ghosts: Vec<BigInt> = (0..ghost_count(lambda.p, trunc)).map(|n| ghost(lambda, n)).collect();
    exp_rational(&ghost_exponent(lambda.p, &ghosts, trunc), trunc)
}

/// `exp(ω_0 T + … + ω_m T^{p^m}/p^m)`: the exponent cut after the stored Witt length.
pub fn ghost_truncated_exp_rational(lambda: &WittCoords, trunc: usize) -> Vec<BigRational> {
    let ghosts: Vec<BigInt> = (0..=lambda.length()).map(|n| ghost(lambda, n)).collect();
    exp_rational(&ghost_exponent(lambda.p, &ghosts, trunc), trunc)
}

pub fn relative_artin_hasse(lambda: &WittCoords, trunc: usize, prec: i64) -> Result<PadicSeries> {
    rational_series(lambda.p, "T", &relative_artin_hasse_rational(lambda, trunc), prec)
}

/// `Π_j E(λ_j T^{p^j})` computed factor by factor (independent of the ghost route).
pub fn artin_hasse_product_rational(lambda: &WittCoords, trunc: usize) -> Vec<BigRational> {
    let p = lambda.p as usize;
    let e = artin_hasse_rational(lambda.p, trunc);
    let mut acc = vec![BigRational::zero(); trunc];
    if trunc > 0 {
        acc[0] = BigRational::one();
    }
    let mut pj = 1usize;
    for lj in &lambda.components {
        if pj >= trunc {
            break;
        }
        // E(λ_j T^{p^j}) = Σ_n a_n λ_j^n T^{n p^j}
        let mut factor = vec![BigRational::zero(); trunc];
        let mut pw = BigInt::one();
        let mut n = 0;
        while n * pj < trunc {
            factor[n * pj] = &e[n] * BigRational::from_integer(pw.clone());
            pw *= lj;
            n += 1;
        }
        let mut next = vec![BigRational::zero(); trunc];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in factor.iter().enumerate().take(trunc - i) {
                if !b.is_zero() {
                    next[i + k] += a * b;
                }
            }
        }
        acc = next;
        pj *= p;
    }
    acc
}

/// Dwork's `θ_π(x) = exp(π(x - x^p))` below `trunc`, via
/// `(k+1) c_{k+1} = π c_k - pπ c_{k-p+1}`.
pub fn dwork_theta(p: u32, trunc: usize, prec: i64) -> Result<PadicSeries> {
    let pi = PAdic::pi(p);
    let ppi = pi.mul_int(p as i64);
    let mut c = vec![PAdic::zero(p); trunc];
    if trunc > 0 {
        c[0] = PAdic::one(p);
    }
    for k in 0..trunc.saturating_sub(1) {
        let mut acc = pi.mul(&c[k]);
        if k + 1 >= p as usize {
            acc = acc.sub(&ppi.mul(&c[k + 1 - p as usize]));
        }
        c[k + 1] = acc.div_prec(&PAdic::from_int(p, k as i64 + 1), prec)?;
    }
    Ok(PadicSeries::new(p, "x", 0, c, Some(trunc as i64)))
}

/// Rank-one module `L_n(λ)` of Witt length 0 and its solution `exp(π λ_0 x^n)`, `x = T^{-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct PulitaModule {
    pub module: RankOneModule,
    pub n: u32,
    /// Solution `e_n(λ, T^{-1})` as a series in `x = T^{-1}`.
    pub solution: PadicSeries,
    /// The solution passes the log-derivative check against the module.
    pub solution_checked: bool,
}

fn check_pulita_input(lambda: &WittCoords, n: u32) -> Result<()> {
    if lambda.length() > 0 && lambda.components[1..].iter().any(|c| !c.is_zero()) {
        return Err(Error::UnsupportedTower(format!(
            "Witt length {} needs π_1 in a degree-{} extension; only length 0 is numeric",
            lambda.length(),
            lambda.p
        )));
    }
    if n == 0 || n.is_multiple_of(lambda.p) {
        return Err(Error::InvalidInput(format!("index n = {n} must be positive and prime to p = {}", lambda.p)));
    }
    Ok(())
}

/// `L_n(λ) = d + n(π λ_0 / T^n) dT/T` with its solution to `trunc` in `x = T^{-1}`.
pub fn pulita_module(lambda: &WittCoords, n: u32, trunc: usize, prec: i64) -> Result<PulitaModule> {
    check_pulita_input(lambda, n)?;
    let p = lambda.p;
    let l0 = PAdic::from_bigint(p, &lambda.components[0]);
    let top = PAdic::pi(p).mul(&l0).mul_int(n as i64);
    let mut a = vec![PAdic::zero(p); n as usize];
    a[n as usize - 1] = top.clone();
    let module = RankOneModule::new(p, a)?;
    let exponent = PadicSeries::monomial(PAdic::pi(p).mul(&l0), n as i64, "x").truncate(trunc as i64);
    let solution = exponent.exp(prec)?;
    // with y(T) = e(x), T dy/dT = -x dy/dx, so horizontality reads x y'/y = a_n x^n
    let lhs = solution.log_derivative(true, prec)?;
    let rhs = PadicSeries::monomial(top, n as i64, "x");
    let solution_checked = lhs.indistinguishable_from(&rhs, lhs.trunc().unwrap_or(0))?;
    Ok(PulitaModule { module, n, solution, solution_checked })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaRatio {
    pub series: PadicSeries,
    pub bound: LinearBound,
}

/// `θ_n(λ, T) = e_n(λ, T^{-1}) / e_n(σλ, T^{-p})` in `x = T^{-1}` with `σ = id`,
/// plus the fitted lower bound `v(c_k) ≥ αk - β`.
pub fn theta_d_ratio(lambda: &WittCoords, n: u32, trunc: usize, prec: i64) -> Result<ThetaRatio> {
    check_pulita_input(lambda, n)?;
    let e = pulita_module(lambda, n, trunc, prec)?.solution;
    let ep = e.compose_x_to_k(lambda.p as i64)?.truncate(trunc as i64);
    let series = e.div(&ep, prec)?;
    let points: Vec<(i64, f64)> = series
        .valuation_profile()
        .into_iter()
        .filter(|(k, v)| *k >= 1 && !v.is_infinite())
        .map(|(k, v)| (k, v.as_f64()))
        .collect();
    let bound = linear_lower_bound(&points);
    Ok(ThetaRatio { series, bound })
}
