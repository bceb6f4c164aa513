//! Auxiliary functions φ: the empirical ratio `η_x(t) = φ(x + tφ(x))/φ(x)`,
//! a fitted Popa parameter, and the self-equivarying / self-neglecting split.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::numeric::slope_through_origin;

/// Default convergence tolerance for [`estimate_rho`].
pub const DEFAULT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiClass {
    SelfEquivarying,
    SelfNeglecting,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiAnalysis {
    pub rho_hat: f64,
    /// Max over the whole `(x, t)` grid of `|η_x(t) − (1 + ρ̂t)|`.
    pub sup_deviation: f64,
    /// Max of `φ(x)/x` over the x grid.
    pub o_x_ratio: f64,
    /// Per-x sup over t of `|η_x(t) − (1 + ρ̂t)|`.
    pub deviation_profile: Vec<f64>,
    /// Per-x `φ(x)/x`.
    pub ratio_profile: Vec<f64>,
    pub converges: bool,
    pub classification: PhiClass,
    pub reason: String,
}

/// `φ(x + tφ(x)) / φ(x)`.
pub fn eta_empirical(phi: &FunctionSpec, x: f64, t: f64) -> Result<f64> {
    let base = phi.try_eval(x)?;
    if base == 0.0 {
        return Err(Error::Singular { what: "φ(x) in η_x", value: x });
    }
    if base < 0.0 {
        return Err(Error::Evaluation { what: format!("{phi} (must be positive)"), x });
    }
    Ok(phi.try_eval(x + t * base)? / base)
}

/// Ten-fold geometric grid `10, 100, …, 10⁸`.
pub fn default_x_grid() -> Vec<f64> {
    (1..=8).map(|k| 10f64.powi(k)).collect()
}

/// Uniform grid on `[0, t_max]` with `count` points.
pub fn uniform_t_grid(t_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..count).map(|i| t_max * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn estimate_rho(phi: &FunctionSpec, x_grid: &[f64], t_grid: &[f64]) -> Result<PhiAnalysis> {
    estimate_rho_with_tol(phi, x_grid, t_grid, DEFAULT_TOL)
}

/// Non-increasing over the last three entries (up to a rounding floor).
fn settles(profile: &[f64]) -> bool {
    let tail = &profile[profile.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-12)
}

pub fn estimate_rho_with_tol(
    phi: &FunctionSpec,
    x_grid: &[f64],
    t_grid: &[f64],
    tol: f64,
) -> Result<PhiAnalysis> {
    if x_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidInput("x and t grids must be non-empty".into()));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("x grid must be strictly increasing".into()));
    }
    let etas: Vec<Vec<f64>> = x_grid
        .iter()
        .map(|&x| t_grid.iter().map(|&t| eta_empirical(phi, x, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let last = etas.last().expect("non-empty grid");
    let shifted: Vec<f64> = last.iter().map(|e| e - 1.0).collect();
    let rho_hat = slope_through_origin(t_grid, &shifted).unwrap_or(0.0);

    let deviation_profile: Vec<f64> = etas
        .iter()
        .map(|row| {
            row.iter()
                .zip(t_grid)
                .map(|(e, t)| (e - (1.0 + rho_hat * t)).abs())
                .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
        })
        .collect();
    let sup_deviation = deviation_profile.iter().copied().fold(0.0, f64::max);
    let ratio_profile: Vec<f64> = x_grid.iter().map(|&x| phi.eval(x) / x).collect();
    let o_x_ratio = ratio_profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let final_dev = *deviation_profile.last().expect("non-empty");
    let converges = settles(&deviation_profile) && final_dev < tol;
    let n = ratio_profile.len();
    let unbounded = n >= 3
        && ratio_profile[n - 3..].windows(2).all(|w| w[1] > w[0])
        && ratio_profile[n - 1] > 1.5 * ratio_profile[n - 3];
    let ratio_vanishing = ratio_profile.windows(2).all(|w| w[1] < w[0]) && ratio_profile[n - 1] < tol;

    let (classification, reason) = if unbounded {
        (PhiClass::Rejected, "φ(x)/x grows along the x grid".to_string())
    } else if !converges {
        (
            PhiClass::Rejected,
            format!("η_x does not settle: final deviation {final_dev:.3e} against tolerance {tol:.1e}"),
        )
    } else if rho_hat.abs() < tol && ratio_vanishing {
        (PhiClass::SelfNeglecting, "η_x → 1 and φ(x)/x → 0".to_string())
    } else {
        (PhiClass::SelfEquivarying, format!("η_x → 1 + {rho_hat:.6}·t"))
    };
    Ok(PhiAnalysis {
        rho_hat,
        sup_deviation,
        o_x_ratio,
        deviation_profile,
        ratio_profile,
        converges,
        classification,
        reason,
    })
}
