//! End-to-end analysis producing a [`ConvergenceReport`].

use serde::{Deserialize, Serialize};

use super::corollary::{verify_corollary, CorollaryReport};
use super::general::general_rv_estimate;
use super::kernel_fit::{
    constancy_segments, feasible_window, fit_index, is_trivial_limit, kernel_estimate, res_cfe_check, KEntry,
    ResCfeReport, Segment,
};
use super::limits::{tabulate_limits, GEntry, LimitEstimator};
use super::uct::{uct_diagnostic, UniformityProfile};
use super::{KendallInput, Mode, TestSet};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::kernel::EquationClass;
use crate::phi::{default_x_grid, estimate_rho_with_tol, uniform_t_grid, PhiAnalysis, PhiClass};
use crate::popa::PopaParam;

/// Below this fraction of settled grid points the input counts as non-convergent.
pub const MIN_SETTLED_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UctOptions {
    pub points: usize,
    /// Horizons; empty means `N/1000, N/100, N/10, N`.
    #[serde(default)]
    pub ladder: Vec<usize>,
    pub tol: f64,
}

impl Default for UctOptions {
    fn default() -> Self {
        Self { points: 31, ladder: Vec::new(), tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Horizon `N`.
    pub n: usize,
    /// Points of the λ lattice across the test set.
    pub lattice_points: usize,
    /// Largest `|j|` of the dilation grid `s_j`; defaults to `lattice_points − 1`.
    pub s_span: Option<usize>,
    pub estimator: LimitEstimator,
    pub osc_tol: f64,
    pub budget: f64,
    pub segment_tol: f64,
    /// Slowly varying factor for the normalising-constant profile.
    pub ell: Option<FunctionSpec>,
    pub corollary_tol: f64,
    pub uct: Option<UctOptions>,
    pub trivial_tol: f64,
    pub sigma_tol: f64,
    pub phi_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            n: 1_000_000,
            lattice_points: 201,
            s_span: None,
            estimator: LimitEstimator::default(),
            osc_tol: 1e-2,
            budget: 0.02,
            segment_tol: 0.05,
            ell: None,
            corollary_tol: 1e-2,
            uct: Some(UctOptions::default()),
            trivial_tol: 1e-9,
            sigma_tol: 1e-6,
            phi_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    NonConvergent,
    Trivial,
    EmptyAnchors,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralSummary {
    pub sigma_s: f64,
    pub class: EquationClass,
    pub formula: &'static str,
    pub r_hat: Vec<(f64, f64)>,
    pub bg_residual: f64,
    pub sigma_check: f64,
    pub table_residual: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub status: Status,
    pub diagnostics: Vec<String>,
    pub mode: &'static str,
    pub group: PopaParam,
    pub phi: Option<PhiAnalysis>,
    pub n: usize,
    pub g_hat: Vec<GEntry>,
    #[serde(rename = "K_hat")]
    pub k_hat: Vec<KEntry>,
    pub kappa_hat: Option<f64>,
    pub fit_residual: Option<f64>,
    pub c_hat: Option<f64>,
    pub mult_residual: Option<f64>,
    pub rescfe_residual: Option<f64>,
    pub triviality_flag: bool,
    pub uniformity_profile: Option<UniformityProfile>,
    pub feasible_window: Option<(f64, f64)>,
    pub segments: Vec<Segment>,
    pub corollary: Option<CorollaryReport>,
    pub rescfe: Option<ResCfeReport>,
    pub general: Option<GeneralSummary>,
}

impl ConvergenceReport {
    fn empty(mode: &'static str, group: PopaParam, phi: Option<PhiAnalysis>, n: usize) -> Self {
        Self {
            status: Status::Converged,
            diagnostics: Vec::new(),
            mode,
            group,
            phi,
            n,
            g_hat: Vec::new(),
            k_hat: Vec::new(),
            kappa_hat: None,
            fit_residual: None,
            c_hat: None,
            mult_residual: None,
            rescfe_residual: None,
            triviality_flag: false,
            uniformity_profile: None,
            feasible_window: None,
            segments: Vec::new(),
            corollary: None,
            rescfe: None,
            general: None,
        }
    }
}

/// Points `group_exp(z_lo + i·h)`, `i < m`, spanning the base of `b` with
/// exact endpoints, restricted to `b`; returns the points and the step `h`.
pub fn lattice(group: PopaParam, b: &TestSet, m: usize) -> Result<(Vec<f64>, f64)> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("lattice needs at least 3 points, got {m}")));
    }
    let (lo, hi) = b.base;
    let z0 = group.group_log(lo)?;
    let h = (group.group_log(hi)? - z0) / (m - 1) as f64;
    let points = (0..m)
        .map(|i| match i {
            0 => lo,
            i if i == m - 1 => hi,
            i => group.group_exp(z0 + i as f64 * h),
        })
        .filter(|&x| b.contains(x))
        .collect();
    Ok((points, h))
}

fn group_for(mode: &Mode, tol: f64) -> Result<(PopaParam, Option<PhiAnalysis>)> {
    let Some(phi) = mode.phi() else { return Ok((PopaParam::INFINITY, None)) };
    let analysis = estimate_rho_with_tol(phi, &default_x_grid(), &uniform_t_grid(3.0, 31), tol)?;
    let group = match analysis.classification {
        PhiClass::SelfNeglecting => PopaParam::ZERO,
        PhiClass::SelfEquivarying => PopaParam::new(analysis.rho_hat)?,
        PhiClass::Rejected => return Err(Error::Degenerate(format!("auxiliary {phi} rejected: {}", analysis.reason))),
    };
    Ok((group, Some(analysis)))
}

fn default_ladder(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [n / 1000, n / 100, n / 10, n].into_iter().filter(|&k| k >= 2).collect();
    v.dedup();
    v
}

pub fn analyze(input: &KendallInput, opts: &AnalysisOptions) -> Result<ConvergenceReport> {
    for (name, v) in [
        ("osc_tol", opts.osc_tol),
        ("segment_tol", opts.segment_tol),
        ("corollary_tol", opts.corollary_tol),
        ("trivial_tol", opts.trivial_tol),
        ("sigma_tol", opts.sigma_tol),
        ("phi_tol", opts.phi_tol),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    input.check_horizon(opts.n)?;
    let (group, phi) = group_for(&input.mode, opts.phi_tol)?;
    let b = &input.test_set;
    let (lambdas, h) = lattice(group, b, opts.lattice_points)?;
    let span = opts.s_span.unwrap_or(opts.lattice_points - 1) as i64;
    let s_grid: Vec<f64> = (-span..=span).map(|j| group.group_exp(j as f64 * h)).collect();
    let mut report = ConvergenceReport::empty(input.mode.name(), group, phi, opts.n);

    if let Some(u) = &opts.uct {
        let ladder = if u.ladder.is_empty() { default_ladder(opts.n) } else { u.ladder.clone() };
        let (lo, hi) = b.base;
        let t_grid: Vec<f64> = (0..u.points.max(2)).map(|i| lo + (hi - lo) * i as f64 / (u.points.max(2) - 1) as f64).collect();
        report.uniformity_profile = Some(uct_diagnostic(input, &t_grid, &ladder, opts.estimator, u.tol)?);
    }

    if let Mode::General { .. } = input.mode {
        match general_rv_estimate(input, group, &lambdas, opts.n, opts.estimator, opts.osc_tol, opts.sigma_tol) {
            Ok(g) => {
                report.g_hat = g.k_hat.entries.clone();
                report.k_hat = g
                    .k_hat
                    .entries
                    .iter()
                    .map(|e| KEntry { s: e.lambda, value: e.value, spread: 0.0, anchors: 1 })
                    .collect();
                report.kappa_hat = Some(g.kappa_hat);
                report.fit_residual = Some(g.table_residual);
                report.mult_residual = Some(g.bg_residual);
                report.feasible_window = Some((lambdas[0], lambdas[lambdas.len() - 1]));
                report.general = Some(GeneralSummary {
                    sigma_s: g.sigma_s,
                    class: g.class,
                    formula: g.cell.formula(),
                    r_hat: g.r_hat.entries.iter().map(|e| (e.lambda, e.value)).collect(),
                    bg_residual: g.bg_residual,
                    sigma_check: g.sigma_check,
                    table_residual: g.table_residual,
                    monotone: g.monotone,
                });
            }
            Err(Error::NonConvergent(msg)) => {
                report.status = Status::NonConvergent;
                report.diagnostics.push(msg);
            }
            Err(e) => return Err(e),
        }
        return Ok(report);
    }

    let g = tabulate_limits(input, group, &lambdas, opts.n, opts.estimator, opts.osc_tol)?;
    report.g_hat = g.entries.clone();
    let settled = g.convergent().count();
    if (settled as f64) < MIN_SETTLED_FRACTION * g.entries.len() as f64 {
        let mut osc: Vec<f64> = g.entries.iter().map(|e| e.tail_oscillation).collect();
        osc.sort_by(f64::total_cmp);
        report.status = Status::NonConvergent;
        report.diagnostics.push(format!(
            "{settled} of {} grid points settle; median tail oscillation {:.3e} against tolerance {:.1e}",
            g.entries.len(),
            osc[osc.len() / 2],
            opts.osc_tol
        ));
        return Ok(report);
    }
    if settled < g.entries.len() {
        report.diagnostics.push(format!("{} of {} grid points did not settle", g.entries.len() - settled, g.entries.len()));
    }
    if is_trivial_limit(&g, opts.trivial_tol) {
        report.status = Status::Trivial;
        report.triviality_flag = true;
        report.diagnostics.push("sequential limits only take the values 0 and 1".into());
        return Ok(report);
    }
    report.feasible_window = feasible_window(&g, b, &s_grid);
    let feasible: Vec<f64> = match report.feasible_window {
        Some((lo, hi)) => s_grid.iter().copied().filter(|&s| s >= lo && s <= hi).collect(),
        None => Vec::new(),
    };
    let k = match kernel_estimate(&g, b, &feasible, opts.trivial_tol) {
        Ok(k) if k.entries.len() >= 3 => k,
        Ok(_) | Err(Error::EmptyAnchors { .. }) => {
            report.status = Status::EmptyAnchors;
            report.diagnostics.push(format!("too few dilations with anchors; feasible window {:?}", report.feasible_window));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let fit = fit_index(&k)?;
    report.k_hat = k.entries;
    report.kappa_hat = Some(fit.kappa_hat);
    report.fit_residual = Some(fit.residual);
    report.mult_residual = Some(fit.mult_residual);
    let rescfe = res_cfe_check(&g, b, fit.kappa_hat, opts.budget, &feasible)?;
    report.rescfe_residual = Some(rescfe.max_residual);
    report.rescfe = Some(rescfe);
    report.segments = constancy_segments(&g, b, fit.kappa_hat, opts.segment_tol)?;
    let corollary = verify_corollary(input, fit.kappa_hat, opts.ell.as_ref(), opts.n, opts.corollary_tol)?;
    report.c_hat = Some(corollary.c_hat);
    report.corollary = Some(corollary);
    Ok(report)
}
