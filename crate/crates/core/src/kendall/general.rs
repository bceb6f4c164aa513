//! The differenced setting `[f(x + tφ(x)) − f(x)]/h(x) → K(t)` with the
//! multiplier `h(x + tφ(x))/h(x) → r(t)`.

use serde::Serialize;

use super::limits::{tabulate_limits, GHat, LimitEstimator};
use super::{AnPolicy, KendallInput, Mode};
use crate::error::{Error, Result};
use crate::kernel::{EquationClass, KernelSpec};
use crate::numeric::slope_through_origin;
use crate::popa::PopaParam;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralReport {
    pub group: PopaParam,
    pub k_hat: GHat,
    pub r_hat: GHat,
    /// Least-squares `ŝ` in `r̂(u) ≈ 1 + ŝK̂(u)`, snapped to 0 within tolerance.
    pub sigma_s: f64,
    pub cell: KernelSpec,
    pub class: EquationClass,
    pub kappa_hat: f64,
    /// Max over grid pairs of `|K̂(u ∘ v) − (K̂(v)r̂(u) + K̂(u))|`.
    pub bg_residual: f64,
    /// Max of `|r̂(u) − (1 + ŝK̂(u))|`.
    pub sigma_check: f64,
    /// Max of `|K̂(t) − K(t)|` against the selected table cell.
    pub table_residual: f64,
    pub monotone: bool,
}

pub fn general_rv_estimate(
    input: &KendallInput,
    group: PopaParam,
    t_grid: &[f64],
    n: usize,
    estimator: LimitEstimator,
    osc_tol: f64,
    sigma_tol: f64,
) -> Result<GeneralReport> {
    let (phi, h) = match &input.mode {
        Mode::General { phi, h } => (phi.clone(), h.clone()),
        _ => return Err(Error::InvalidInput("general estimate needs the general mode".into())),
    };
    let k_hat = tabulate_limits(input, group, t_grid, n, estimator, osc_tol)?;
    if let Some(e) = k_hat.entries.iter().find(|e| !e.convergent) {
        return Err(Error::NonConvergent(format!(
            "difference quotient at t = {} oscillates by {:.3e}",
            e.lambda, e.tail_oscillation
        )));
    }
    let h_input = KendallInput {
        f: h,
        seq: input.seq.clone(),
        test_set: input.test_set.clone(),
        a_policy: AnPolicy::Reciprocal,
        mode: Mode::Beurling { phi },
    };
    let r_hat = tabulate_limits(&h_input, group, t_grid, n, estimator, osc_tol)?;
    if let Some(e) = r_hat.entries.iter().find(|e| !e.convergent || !(e.value > 0.0)) {
        return Err(Error::Degenerate(format!("h ratio at t = {} does not settle to a positive value", e.lambda)));
    }
    let ks: Vec<f64> = k_hat.entries.iter().map(|e| e.value).collect();
    let rs: Vec<f64> = r_hat.entries.iter().map(|e| e.value).collect();
    let psi: Vec<f64> = t_grid.iter().map(|&t| group.group_log(t)).collect::<Result<_>>()?;

    let r_minus_one: Vec<f64> = rs.iter().map(|r| r - 1.0).collect();
    let raw_s = slope_through_origin(&ks, &r_minus_one)
        .ok_or_else(|| Error::Degenerate("difference quotients vanish on the grid".into()))?;
    let sigma_s = if raw_s.abs() <= sigma_tol { 0.0 } else { raw_s };
    if sigma_s < 0.0 {
        return Err(Error::Degenerate(format!("fitted σ parameter {sigma_s} is negative")));
    }
    let kappa_hat = if sigma_s == 0.0 {
        slope_through_origin(&psi, &ks)
    } else {
        let logs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
        slope_through_origin(&psi, &logs)
    }
    .ok_or_else(|| Error::Degenerate("t grid holds only the identity".into()))?;
    let cell = KernelSpec::new(group, PopaParam::new(sigma_s)?, kappa_hat)?;

    let mut bg_residual: f64 = 0.0;
    for (u, (ku, ru)) in t_grid.iter().zip(ks.iter().zip(&rs)) {
        for (v, kv) in t_grid.iter().zip(&ks) {
            let Ok(w) = group.circle(*u, *v) else { continue };
            if let Some(kw) = k_hat.lookup(w) {
                bg_residual = bg_residual.max((kw.value - (kv * ru + ku)).abs());
            }
        }
    }
    let sigma_check = ks.iter().zip(&rs).map(|(k, r)| (r - (1.0 + sigma_s * k)).abs()).fold(0.0, f64::max);
    let table_residual = t_grid
        .iter()
        .zip(&ks)
        .map(|(&t, k)| Ok((cell.eval(t)? - k).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let monotone = ks.windows(2).all(|w| w[1] > w[0]) || ks.windows(2).all(|w| w[1] < w[0]);
    Ok(GeneralReport {
        group,
        k_hat,
        r_hat,
        sigma_s,
        class: cell.class(),
        cell,
        kappa_hat,
        bg_residual,
        sigma_check,
        table_residual,
        monotone,
    })
}
