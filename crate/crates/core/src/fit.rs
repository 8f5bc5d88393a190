//! Linear fits to valuation profiles `k ↦ v_k`.

use serde::{Deserialize, Serialize};

/// `v_k ≥ alpha·k - beta` over `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBound {
    pub alpha: f64,
    pub beta: f64,
    pub window: (i64, i64),
}

/// Lower convex hull of the points, sorted by `k`.
pub fn lower_hull(points: &[(i64, f64)]) -> Vec<(i64, f64)> {
    let mut pts: Vec<(i64, f64)> = points.iter().copied().filter(|(_, v)| v.is_finite()).collect();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by_key(|p| p.0);
    let mut hull: Vec<(i64, f64)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) as f64 * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

/// Slope of the chord joining the ends of the lower hull, with the smallest
/// `beta` making the line a lower bound for every point.
pub fn linear_lower_bound(points: &[(i64, f64)]) -> LinearBound {
    let hull = lower_hull(points);
    if hull.is_empty() {
        return LinearBound { alpha: 0.0, beta: 0.0, window: (0, 0) };
    }
    let (first, last) = (hull[0], hull[hull.len() - 1]);
    let alpha = if last.0 > first.0 { (last.1 - first.1) / (last.0 - first.0) as f64 } else { 0.0 };
    let beta = points
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, v)| alpha * *k as f64 - v)
        .fold(f64::NEG_INFINITY, f64::max);
    LinearBound { alpha, beta, window: (first.0, last.0) }
}

/// Ordinary least-squares line `v ≈ a + b k`; returns `(a, b)`.
pub fn least_squares(points: &[(i64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, v)| v.is_finite()).map(|(k, v)| (*k as f64, *v)).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (pts.first().map_or(0.0, |p| p.1), 0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}
