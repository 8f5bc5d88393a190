//! Versioned store of frozen values, compared digit by digit on later runs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use frobrig_core::acceptance::CriterionResult;
use frobrig_core::PAdic;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoldenEntry {
    /// Where the value came from.
    pub origin: String,
    pub value: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoldenStore {
    pub version: u32,
    pub entries: BTreeMap<String, GoldenEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub key: String,
    pub stored: Value,
    pub current: Value,
    /// First π-digit at which two p-adic values differ.
    pub first_differing_digit: Option<i64>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: stored {} vs current {}", self.key, self.stored, self.current)?;
        if let Some(d) = self.first_differing_digit {
            write!(f, " (first differing π-digit: {d})")?;
        }
        Ok(())
    }
}

fn as_padic(v: &Value) -> Option<PAdic> {
    serde_json::from_value(v.clone()).ok()
}

impl GoldenStore {
    pub fn from_results(results: &[CriterionResult]) -> Self {
        let mut entries = BTreeMap::new();
        let mut put = |k: &str, v: &Value| {
            if !v.is_null() {
                entries.insert(k.to_string(), GoldenEntry { origin: "first-run".into(), value: v.clone() });
            }
        };
        for r in results {
            match r.id {
                7 => put("wild.counts", &r.measured),
                8 => {
                    if let Some(Value::Array(q1)) = r.measured.get("q1_values") {
                        for (i, v) in q1.iter().enumerate() {
                            put(&format!("canonical.q1.{}{}", i / 2, i % 2), v);
                        }
                    }
                }
                9 => {
                    put("flagship.b", r.measured.get("b_value").unwrap_or(&Value::Null));
                    put("flagship.twist", r.measured.get("twist").unwrap_or(&Value::Null));
                    put("flagship.objective", r.measured.get("objective").unwrap_or(&Value::Null));
                }
                _ => {}
            }
        }
        GoldenStore { version: STORE_VERSION, entries }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let store: GoldenStore = serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))?;
        if store.version != STORE_VERSION {
            bail!("golden store version {} (expected {STORE_VERSION})", store.version);
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// Entries of `self` that `current` lacks or disagrees with.
    pub fn compare(&self, current: &GoldenStore) -> Result<Vec<Mismatch>> {
        let mut out = Vec::new();
        for (k, stored) in &self.entries {
            let cur = current.entries.get(k).map(|e| e.value.clone()).unwrap_or(Value::Null);
            if cur == stored.value {
                continue;
            }
            let first_differing_digit = match (as_padic(&stored.value), as_padic(&cur)) {
                (Some(a), Some(b)) => {
                    if a.p() == b.p() && a.sub(&b).is_zero() {
                        continue;
                    }
                    a.sub(&b).val_pi_lower()
                }
                _ => None,
            };
            out.push(Mismatch { key: k.clone(), stored: stored.value.clone(), current: cur, first_differing_digit });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn store(v: Value) -> GoldenStore {
        let mut entries = BTreeMap::new();
        entries.insert("x".to_string(), GoldenEntry { origin: "first-run".into(), value: v });
        GoldenStore { version: STORE_VERSION, entries }
    }

    #[test]
    fn padic_mismatch_reports_digit() {
        let a = serde_json::to_value(PAdic::from_int(5, -135)).unwrap();
        let b = serde_json::to_value(PAdic::from_int(5, -10)).unwrap();
        let m = store(a.clone()).compare(&store(b)).unwrap();
        assert_eq!(m.len(), 1);
        // -135 - (-10) = -125 = π^12
        assert_eq!(m[0].first_differing_digit, Some(12));
        assert!(store(a.clone()).compare(&store(a)).unwrap().is_empty());
    }

    #[test]
    fn plain_mismatch() {
        let m = store(json!("-1/p")).compare(&store(json!("-p"))).unwrap();
        assert_eq!(m[0].first_differing_digit, None);
        assert!(m[0].to_string().contains("-1/p"));
    }
}
