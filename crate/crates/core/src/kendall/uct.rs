//! Uniformity of the convergence `a_N f(t ∘ x_N) → ĝ(t)` over a compact window.

use serde::Serialize;

use super::limits::{estimate, LimitEstimator};
use super::KendallInput;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityProfile {
    pub t_window: (f64, f64),
    /// `(N, sup_t |a_N f(t ∘ x_N) − ĝ(t)|)` over the ladder.
    pub rows: Vec<(usize, f64)>,
    pub uniform: bool,
}

/// `ĝ` is read at the largest rung with `estimator`; convergence is uniform
/// iff the sup profile is non-increasing and ends below `tol`.
pub fn uct_diagnostic(
    input: &KendallInput,
    t_grid: &[f64],
    ladder: &[usize],
    estimator: LimitEstimator,
    tol: f64,
) -> Result<UniformityProfile> {
    if t_grid.is_empty() || ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("need a non-empty t grid and an increasing N ladder".into()));
    }
    let top = *ladder.last().expect("non-empty");
    input.check_horizon(top)?;
    let limit: Vec<f64> = t_grid
        .iter()
        .map(|&t| Ok(estimate(input, t, top, estimator, f64::INFINITY)?.value))
        .collect::<Result<_>>()?;
    let rows: Vec<(usize, f64)> = ladder
        .iter()
        .map(|&n| {
            let sup = t_grid
                .iter()
                .zip(&limit)
                .map(|(&t, g)| Ok((input.term(n, t)? - g).abs()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((n, sup))
        })
        .collect::<Result<_>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].1 <= w[0].1 || w[1].1 <= 1e-12);
    let uniform = decreasing && rows.last().expect("non-empty").1 < tol;
    let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(UniformityProfile { t_window: (lo, hi), rows, uniform })
}
