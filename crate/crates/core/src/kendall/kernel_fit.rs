//! Kernel ratios over anchors, index fitting, restricted Cauchy residuals
//! and constancy segments.

use serde::Serialize;

use super::limits::GHat;
use super::TestSet;
use crate::error::{Error, Result};
use crate::numeric::{median, slope_through_origin, upper_quantile};
use crate::popa::PopaParam;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KEntry {
    pub s: f64,
    pub value: f64,
    /// `max/min − 1` over the anchor ratios.
    pub spread: f64,
    pub anchors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KHat {
    pub group: PopaParam,
    pub entries: Vec<KEntry>,
    pub feasible_window: Option<(f64, f64)>,
}

impl KHat {
    pub fn lookup(&self, s: f64) -> Option<&KEntry> {
        let tol = 1e-9 * s.abs().max(1.0);
        let i = self.entries.partition_point(|e| e.s < s - tol);
        self.entries.get(i).filter(|e| (e.s - s).abs() <= tol)
    }
}

/// Anchor pairs `(ĝ(λ), ĝ(λ ∘ s))` with `λ` and `λ ∘ s` in `B` and both entries convergent.
fn anchor_pairs(g: &GHat, b: &TestSet, s: f64) -> Vec<(f64, f64)> {
    g.convergent()
        .filter(|e| b.contains(e.lambda) && e.value != 0.0)
        .filter_map(|e| {
            let c = g.group.circle(e.lambda, s).ok()?;
            if !b.contains(c) {
                return None;
            }
            let image = g.lookup(c).filter(|i| i.convergent)?;
            Some((e.value, image.value))
        })
        .collect()
}

/// The smallest and largest `s` of the grid having at least one anchor.
pub fn feasible_window(g: &GHat, b: &TestSet, s_grid: &[f64]) -> Option<(f64, f64)> {
    let feasible: Vec<f64> = s_grid.iter().copied().filter(|&s| !anchor_pairs(g, b, s).is_empty()).collect();
    let lo = feasible.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = feasible.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo <= hi).then_some((lo, hi))
}

/// True when `ĝ` only takes the values 0 and 1 and does take 0.
pub fn is_trivial_limit(g: &GHat, tol: f64) -> bool {
    let values: Vec<f64> = g.convergent().map(|e| e.value).collect();
    crate::kernel::is_trivial(&values, tol) && values.iter().any(|v| v.abs() <= tol)
}

/// `K̂(s)` = median over anchors of `ĝ(λ ∘ s)/ĝ(λ)`.
pub fn kernel_estimate(g: &GHat, b: &TestSet, s_grid: &[f64], trivial_tol: f64) -> Result<KHat> {
    if is_trivial_limit(g, trivial_tol) {
        return Err(Error::Trivial("sequential limits only take the values 0 and 1".into()));
    }
    let mut sorted = s_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let window = feasible_window(g, b, &sorted);
    let mut entries = Vec::with_capacity(sorted.len());
    for s in sorted {
        let ratios: Vec<f64> = anchor_pairs(g, b, s).into_iter().map(|(base, image)| image / base).collect();
        if ratios.is_empty() {
            return Err(Error::EmptyAnchors { s, window });
        }
        let value = median(&ratios).expect("non-empty");
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = if lo > 0.0 { hi / lo - 1.0 } else { (hi - lo) / value.abs().max(f64::MIN_POSITIVE) };
        entries.push(KEntry { s, value, spread, anchors: ratios.len() });
    }
    Ok(KHat { group: g.group, entries, feasible_window: window })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexFit {
    pub kappa_hat: f64,
    /// Root-mean-square of `ln K̂(s) − κ̂ψ(s)`.
    pub residual: f64,
    /// Max over grid pairs with `s ∘ t` on the grid of
    /// `|K̂(s ∘ t) − K̂(s)K̂(t)| / max(1, |K̂(s)K̂(t)|)`.
    pub mult_residual: f64,
}

/// Slope of `ln K̂` against the group logarithm `ψ(s)` (`ln s`,
/// `ln(1 + ρs)` or `s`).
pub fn fit_index(k: &KHat) -> Result<IndexFit> {
    if k.entries.len() < 3 {
        return Err(Error::InsufficientData(format!("index fit needs 3 kernel entries, got {}", k.entries.len())));
    }
    let mut mult_residual: f64 = 0.0;
    for a in &k.entries {
        for b in &k.entries {
            let Ok(c) = k.group.circle(a.s, b.s) else { continue };
            if let Some(e) = k.lookup(c) {
                let prod = a.value * b.value;
                mult_residual = mult_residual.max((e.value - prod).abs() / prod.abs().max(1.0));
            }
        }
    }
    if k.entries.iter().all(|e| (e.value - 1.0).abs() <= 1e-12) {
        return Ok(IndexFit { kappa_hat: 0.0, residual: 0.0, mult_residual });
    }
    if let Some(e) = k.entries.iter().find(|e| !(e.value > 0.0)) {
        return Err(Error::Degenerate(format!("kernel value {} at s = {} is not positive", e.value, e.s)));
    }
    let psi: Vec<f64> = k.entries.iter().map(|e| k.group.group_log(e.s)).collect::<Result<_>>()?;
    let logs: Vec<f64> = k.entries.iter().map(|e| e.value.ln()).collect();
    let kappa_hat = slope_through_origin(&psi, &logs)
        .ok_or_else(|| Error::Degenerate("kernel grid holds only the identity".into()))?;
    let residual =
        (psi.iter().zip(&logs).map(|(p, l)| (l - kappa_hat * p).powi(2)).sum::<f64>() / psi.len() as f64).sqrt();
    Ok(IndexFit { kappa_hat, residual, mult_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResCfeRow {
    pub s: f64,
    pub residual: f64,
    pub anchors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResCfeReport {
    pub budget: f64,
    pub rows: Vec<ResCfeRow>,
    pub max_residual: f64,
}

/// Per `s`, the `(1 − budget)`-quantile over anchors of
/// `|ĝ(λ ∘ s) / (η(s)^κ ĝ(λ)) − 1|`; anchorless `s` are skipped.
pub fn res_cfe_check(g: &GHat, b: &TestSet, kappa_hat: f64, budget: f64, s_grid: &[f64]) -> Result<ResCfeReport> {
    if !(0.0..1.0).contains(&budget) {
        return Err(Error::InvalidInput(format!("budget {budget} not in [0, 1)")));
    }
    let mut rows = Vec::new();
    for &s in s_grid {
        let factor = (kappa_hat * g.group.group_log(s)?).exp();
        let devs: Vec<f64> =
            anchor_pairs(g, b, s).into_iter().map(|(base, image)| (image / (factor * base) - 1.0).abs()).collect();
        if let Some(residual) = upper_quantile(&devs, 1.0 - budget) {
            rows.push(ResCfeRow { s, residual, anchors: devs.len() });
        }
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ResCfeReport { budget, rows, max_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// Median of `ĝ(λ)/η(λ)^κ` over the segment.
    pub constant: f64,
    pub points: usize,
}

/// Maximal runs of consecutive grid points in `B` on which
/// `ĝ(λ)/η(λ)^κ` has no relative jump above `tol`; holes always split.
pub fn constancy_segments(g: &GHat, b: &TestSet, kappa_hat: f64, tol: f64) -> Result<Vec<Segment>> {
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut prev: Option<(usize, f64, f64)> = None;
    for (i, e) in g.entries.iter().enumerate() {
        if !e.convergent || !b.contains(e.lambda) {
            continue;
        }
        let h = e.value / (kappa_hat * g.group.group_log(e.lambda)?).exp();
        let split = match prev {
            None => true,
            Some((j, lam, hp)) => j + 1 != i || b.hole_between(lam, e.lambda) || (h / hp - 1.0).abs() > tol,
        };
        if split {
            segments.push(Vec::new());
        }
        segments.last_mut().expect("segment opened").push((e.lambda, h));
        prev = Some((i, e.lambda, h));
    }
    Ok(segments
        .into_iter()
        .map(|seg| {
            let hs: Vec<f64> = seg.iter().map(|p| p.1).collect();
            Segment {
                lo: seg[0].0,
                hi: seg[seg.len() - 1].0,
                constant: median(&hs).expect("non-empty"),
                points: seg.len(),
            }
        })
        .collect())
}
