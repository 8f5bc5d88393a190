//! Slope multisets of isoclinic adjoint connections and subsidiary-radius
//! profiles on annuli.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{lookup, stable_spectrum};
use crate::padic::PAdic;
use crate::robba::RankOneModule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum SlopeCase {
    /// θ-connection for a stable grading of order `m` (`None` = Coxeter, `m = h`).
    Theta { m: Option<u32> },
    Airy,
}

impl SlopeCase {
    pub fn name(&self) -> &'static str {
        match self {
            SlopeCase::Theta { .. } => "theta",
            SlopeCase::Airy => "airy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeMultiset {
    pub entries: Vec<(Ratio<i64>, u32)>,
}

impl SlopeMultiset {
    pub fn rank(&self) -> u32 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// `Σ slope · multiplicity`.
    pub fn total(&self) -> Ratio<i64> {
        self.entries.iter().map(|(s, m)| s * *m as i64).sum()
    }

    pub fn max_slope(&self) -> Ratio<i64> {
        self.entries.iter().map(|e| e.0).max().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    #[serde(rename = "type")]
    pub type_name: String,
    pub case: SlopeCase,
    pub multiset: SlopeMultiset,
    /// Maximal slope `ν`.
    pub nu: Ratio<i64>,
    /// Swan conductor (θ) or irregularity (Airy) of the adjoint.
    pub conductor: Ratio<i64>,
}

/// Adjoint slopes: `♯Φ` copies of `N/m` and `r` copies of `0`.
pub fn isoclinic_slope_multiset(case: SlopeCase, type_name: &str) -> Result<SlopeReport> {
    let row = lookup(type_name)?;
    let (mut roots, mut zeros) = (row.roots, row.rank);
    if row.family() == 'A' {
        // type A: read the multiplicities off ad(X_1 + X_low) directly
        let n = row.rank as usize + 1;
        let s = stable_spectrum(n, &PAdic::one(2), 8)?;
        roots = s.roots.len() as u32;
        zeros = s.zeros as u32;
    }
    let h = row.coxeter as i64;
    let slope = match case {
        SlopeCase::Theta { m } => {
            let m = m.map(|m| m as i64).unwrap_or(h);
            if m < 1 {
                return Err(Error::InvalidInput("grading order m must be ≥ 1".into()));
            }
            Ratio::new(1, m)
        }
        SlopeCase::Airy => Ratio::new(h + 1, h),
    };
    let mut entries = vec![(slope, roots)];
    if zeros > 0 {
        entries.push((Ratio::from_integer(0), zeros));
    }
    let multiset = SlopeMultiset { entries };
    Ok(SlopeReport {
        type_name: row.name.clone(),
        case,
        nu: multiset.max_slope(),
        conductor: multiset.total(),
        multiset,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSample {
    pub rho: f64,
    pub radii: Vec<f64>,
    pub predicted: Vec<f64>,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusProfile {
    pub samples: Vec<RadiusSample>,
    /// Indices of eigenvalues that are neither zero nor units.
    pub violations: Vec<usize>,
    /// `log R / log ρ` per eigen-line, constant over the grid when linear.
    pub exponents: Vec<Option<f64>>,
}

impl RadiusProfile {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.samples.iter().all(|s| s.agrees) && self.exponents.iter().all(|e| e.is_some())
    }
}

/// Radii of the eigen-lines `d + scale·ε_α s^{-1} ds/s` of a diagonalized
/// leading term: `ρ²` for unit `ε_α`, `ρ` for `ε_α = 0`.
pub fn annulus_radius_profile(eigenvalues: &[PAdic], scale: &PAdic, grid: &[f64]) -> Result<RadiusProfile> {
    let p = scale.p();
    let mut modules = Vec::with_capacity(eigenvalues.len());
    let mut violations = Vec::new();
    for (i, e) in eigenvalues.iter().enumerate() {
        let zero = e.is_zero();
        if !zero && e.val_pi() != Some(0) {
            violations.push(i);
        }
        modules.push((zero, if zero { None } else { Some(RankOneModule::new(p, vec![scale.mul(e)])?) }));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut exps: Vec<Vec<f64>> = vec![Vec::new(); modules.len()];
    for &rho in grid {
        if !(0.0 < rho && rho < 1.0) {
            return Err(Error::InvalidInput(format!("ρ = {rho} outside (0, 1)")));
        }
        let radii: Vec<f64> = modules.iter().map(|(_, m)| m.as_ref().map_or(rho, |m| m.generic_radius(rho))).collect();
        let predicted: Vec<f64> = modules.iter().map(|(z, _)| if *z { rho } else { rho * rho }).collect();
        let agrees = radii.iter().zip(&predicted).all(|(a, b)| ((a - b) / b).abs() < 1e-9);
        for (k, r) in radii.iter().enumerate() {
            exps[k].push(r.ln() / rho.ln());
        }
        samples.push(RadiusSample { rho, radii, predicted, agrees });
    }
    let exponents = exps
        .iter()
        .map(|v| {
            let first = *v.first()?;
            v.iter().all(|x| (x - first).abs() < 1e-9).then_some(first)
        })
        .collect();
    Ok(RadiusProfile { samples, violations, exponents })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn spec_multisets() {
        let a1 = isoclinic_slope_multiset(SlopeCase::Theta { m: None }, "A1").unwrap();
        assert_eq!(a1.multiset.entries, vec![(r(1, 2), 2), (r(0, 1), 1)]);
        assert_eq!(a1.conductor, r(1, 1));
        let ai = isoclinic_slope_multiset(SlopeCase::Airy, "A1").unwrap();
        assert_eq!(ai.multiset.entries, vec![(r(3, 2), 2), (r(0, 1), 1)]);
        assert_eq!(ai.conductor, r(3, 1));
        let a2 = isoclinic_slope_multiset(SlopeCase::Theta { m: None }, "A_2").unwrap();
        assert_eq!(a2.multiset.entries, vec![(r(1, 3), 6), (r(0, 1), 2)]);
        assert_eq!(a2.conductor, r(2, 1));
        assert!(isoclinic_slope_multiset(SlopeCase::Airy, "X9").is_err());
    }

    #[test]
    fn mass_and_integrality() {
        for row in crate::lie::tables() {
            for case in [SlopeCase::Theta { m: None }, SlopeCase::Airy] {
                let rep = isoclinic_slope_multiset(case, &row.name).unwrap();
                assert_eq!(rep.multiset.rank(), row.dimension());
                assert!(rep.conductor.is_integer());
            }
        }
    }

    #[test]
    fn bessel_radii() {
        let p = 5;
        let eig = [PAdic::zero(p), PAdic::from_int(p, 2), PAdic::from_int(p, -2)];
        let scale = PAdic::pi(p).mul_int(4);
        let grid: Vec<f64> = (1..=20).map(|i| 0.2 + 0.035 * i as f64).collect();
        let prof = annulus_radius_profile(&eig, &scale, &grid).unwrap();
        assert!(prof.ok());
        let at = annulus_radius_profile(&eig, &scale, &[0.2]).unwrap();
        let mut rs = at.samples[0].radii.clone();
        rs.sort_by(f64::total_cmp);
        assert!((rs[0] - 0.04).abs() < 1e-12 && (rs[1] - 0.04).abs() < 1e-12 && (rs[2] - 0.2).abs() < 1e-12);
        let bad = [PAdic::zero(p), PAdic::from_int(p, 10), PAdic::from_int(p, -2)];
        let prof = annulus_radius_profile(&bad, &scale, &grid).unwrap();
        assert_eq!(prof.violations, vec![1]);
        assert!(!prof.ok());
    }
}
