//! Rank-one differential modules `d + (a_d/T^d + … + a_1/T) dT/T` over the Robba ring.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::PAdic;

/// Extra π-digits demanded before a coefficient is classified against the
/// boundary valuation `1/(p-1)`.
pub const BOUNDARY_MARGIN: i64 = 2;

#[derive(Debug, Clone, Serialize)]
pub struct RankOneModule {
    p: u32,
    /// `a[i]` is the coefficient `a_{i+1}`.
    a: Vec<PAdic>,
}

/// Outcome of the necessary solvability test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolvabilityCheck {
    pub holds: bool,
    /// First index (1-based) violating the bound, if any.
    pub witness: Option<usize>,
}

impl RankOneModule {
    pub fn new(p: u32, a: Vec<PAdic>) -> Result<Self> {
        match a.last() {
            None => Err(Error::InvalidInput("a rank-one module needs d ≥ 1".into())),
            Some(top) if top.is_zero() => Err(Error::InvalidInput("leading coefficient a_d must be nonzero".into())),
            Some(_) => {
                if a.iter().any(|c| c.p() != p) {
                    return Err(Error::InvalidInput("coefficients over different fields".into()));
                }
                Ok(RankOneModule { p, a })
            }
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[PAdic] {
        &self.a
    }

    /// Valuation of `a_j` in π-units, or `None` if it is known to exceed
    /// `floor` (the coefficient is zero at precision ≥ `floor`).
    fn val_above(&self, j: usize, floor: i64) -> Result<Option<i64>> {
        let c = &self.a[j - 1];
        match c.val_pi() {
            Some(v) => Ok(Some(v)),
            None => match c.abs_prec() {
                None => Ok(None),
                Some(a) if a >= floor + BOUNDARY_MARGIN => Ok(None),
                Some(a) => Err(Error::InsufficientPrecision(format!(
                    "a_{j} = O(π^{a}) cannot be compared with π^{floor}"
                ))),
            },
        }
    }

    /// `v(a_d) ≥ 1/(p-1)` and `v(a_i) > 0` for `i < d`.
    pub fn solvable_necessary(&self) -> Result<SolvabilityCheck> {
        // in π-units both bounds read v ≥ 1
        for j in 1..=self.d() {
            if let Some(v) = self.val_above(j, 1)? {
                if v < 1 {
                    return Ok(SolvabilityCheck { holds: false, witness: Some(j) });
                }
            }
        }
        Ok(SolvabilityCheck { holds: true, witness: None })
    }

    /// `Irr`, by stripping top coefficients of valuation above `1/(p-1)` with
    /// trivial length-0 exponential twists.
    pub fn irregularity(&self) -> Result<usize> {
        for (i, c) in self.a.iter().enumerate() {
            if !c.is_exact_zero() && (i + 1) % self.p as usize == 0 {
                return Err(Error::UnsupportedTower(format!(
                    "a_{} is nonzero and p = {} divides its index",
                    i + 1,
                    self.p
                )));
            }
        }
        let check = self.solvable_necessary()?;
        if !check.holds {
            return Err(Error::NotSolvable(format!("a_{} violates the solvability bound", check.witness.unwrap())));
        }
        let mut top = self.d();
        while top > 0 {
            match self.val_above(top, 1)? {
                None => {}
                Some(1) => return Ok(top),
                Some(v) if v > 1 => {}
                Some(_) => {
                    return Err(Error::NotSolvable(format!(
                        "after removing higher terms a_{top} has valuation below 1/(p-1)"
                    )))
                }
            }
            // twist by L_top(λ) with λ_0 = -a_top/(top·π), |λ_0| < 1: trivial, removes a_top
            top -= 1;
        }
        Ok(0)
    }

    /// `R(L, ρ) = min(ρ, min_j ω|a_j|^{-1} ρ^{j+1})` (float).
    pub fn generic_radius(&self, rho: f64) -> f64 {
        let p = self.p as f64;
        let omega = p.powf(-1.0 / (p - 1.0));
        self.a
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| omega / c.norm() * rho.powi(i as i32 + 2))
            .fold(rho, f64::min)
    }

    /// Irregularity read off the radius near the boundary: `R(ρ) = ρ^{1+Irr}`
    /// as `ρ → 1⁻`.
    pub fn irregularity_by_radius(&self) -> usize {
        let rho: f64 = 1.0 - 1e-7;
        let r = self.generic_radius(rho);
        let slope = r.ln() / rho.ln() - 1.0;
        slope.round().max(0.0) as usize
    }
}

/// `generic_radius_rank1` for the single top term.
pub fn generic_radius_top(m: &RankOneModule, rho: f64) -> f64 {
    let p = m.p as f64;
    let omega = p.powf(-1.0 / (p - 1.0));
    let top = m.a.last().unwrap();
    rho.min(omega / top.norm() * rho.powi(m.d() as i32 + 1))
}
