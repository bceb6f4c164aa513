//! Sequential limits `ĝ(λ)` with tail-oscillation certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KendallInput;
use crate::error::{Error, Result};
use crate::numeric::lstsq;
use crate::popa::PopaParam;

/// How `ĝ(λ)` is read off the sequence `v_n = a_n f(λ ∘ x_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LimitEstimator {
    /// `v_N`.
    Terminal,
    /// Least-squares fit of `v` at the checkpoints `N, N/2, …, N/2^{levels−1}`
    /// against `1, u, …, u^{log_degree}, 1/x` with `u = 1/ln x_n`; the
    /// intercept is the estimate. Removes slowly varying drift of
    /// logarithmic type and `O(1/x)` corrections. Falls back to `v_N` when
    /// the correction is out of proportion to the drift over `[N/2, N]`.
    Extrapolated { log_degree: usize, levels: usize },
}

impl Default for LimitEstimator {
    fn default() -> Self {
        LimitEstimator::Extrapolated { log_degree: 2, levels: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GEntry {
    pub lambda: f64,
    pub value: f64,
    /// `v_N` itself.
    pub terminal: f64,
    /// `max |v_n − v_N| / max(|v_N|, 1)` over the last tenth of indices.
    pub tail_oscillation: f64,
    pub convergent: bool,
}

/// `ĝ` on a grid sorted by `λ`, with the group acting on `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GHat {
    pub group: PopaParam,
    pub entries: Vec<GEntry>,
}

impl GHat {
    /// Exact table (oscillation 0), for oracles and tests.
    pub fn from_values(group: PopaParam, values: &[(f64, f64)]) -> Result<Self> {
        let entries: Vec<GEntry> = values
            .iter()
            .map(|&(lambda, value)| GEntry { lambda, value, terminal: value, tail_oscillation: 0.0, convergent: true })
            .collect();
        Self::new(group, entries)
    }

    pub fn new(group: PopaParam, entries: Vec<GEntry>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[1].lambda > w[0].lambda)) {
            return Err(Error::InvalidInput("λ grid must be strictly increasing".into()));
        }
        Ok(Self { group, entries })
    }

    /// Entry whose `λ` matches to relative `1e-9`.
    pub fn lookup(&self, lambda: f64) -> Option<&GEntry> {
        let tol = 1e-9 * lambda.abs().max(1.0);
        let i = self.entries.partition_point(|e| e.lambda < lambda - tol);
        self.entries.get(i).filter(|e| (e.lambda - lambda).abs() <= tol)
    }

    pub fn convergent(&self) -> impl Iterator<Item = &GEntry> {
        self.entries.iter().filter(|e| e.convergent)
    }
}

/// `N, N/2, …` down to `levels` entries, stopping at index 1.
pub fn checkpoints(n: usize, levels: usize) -> Vec<usize> {
    (0..levels).map(|j| n >> j).take_while(|&k| k >= 1).collect()
}

fn tail_indices(n: usize) -> Vec<usize> {
    let width = (n / 10).max(1);
    let start = n + 1 - width;
    let step = width.div_ceil(2000).max(1);
    let mut idx: Vec<usize> = (0..).map(|k| n - k * step).take_while(|&i| i >= start).collect();
    idx.reverse();
    idx
}

/// Slack on the correction an extrapolation may apply relative to the last drift.
const DRIFT_FACTOR: f64 = 4.0;

fn extrapolate(input: &KendallInput, lambda: f64, n: usize, degree: usize, levels: usize, terminal: f64) -> Result<f64> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for k in checkpoints(n, levels) {
        let x = input.x_n(k)?;
        if x > 1.0 {
            xs.push(x);
            vs.push(if k == n { terminal } else { input.term(k, lambda)? });
        }
    }
    let params = degree + 2;
    if xs.len() < params + 1 {
        return Ok(terminal);
    }
    let mut columns: Vec<Vec<f64>> = (0..=degree)
        .map(|d| xs.iter().map(|x| x.ln().recip().powi(d as i32)).collect())
        .collect();
    columns.push(xs.iter().map(|x| x.recip()).collect());
    let fitted = lstsq(&columns, &vs)?[0];
    // logarithmic drift of size d between N/2 and N moves the limit by at most
    // about d·ln(x_{N/2})/ln(x_N/x_{N/2}); larger corrections are fit artefacts
    let drift = (vs[0] - vs[1]).abs();
    let allowed = DRIFT_FACTOR * drift * xs[1].ln() / (xs[0] / xs[1]).ln() + 1e-14 * terminal.abs().max(1.0);
    Ok(if (fitted - terminal).abs() <= allowed { fitted } else { terminal })
}

pub(super) fn estimate(input: &KendallInput, lambda: f64, n: usize, estimator: LimitEstimator, osc_tol: f64) -> Result<GEntry> {
    let tail: Vec<f64> = tail_indices(n).into_iter().map(|k| input.term(k, lambda)).collect::<Result<_>>()?;
    let terminal = *tail.last().expect("non-empty tail");
    let scale = terminal.abs().max(1.0);
    let tail_oscillation = tail.iter().map(|v| (v - terminal).abs() / scale).fold(0.0, f64::max);
    let value = match estimator {
        LimitEstimator::Terminal => terminal,
        LimitEstimator::Extrapolated { log_degree, levels } => {
            extrapolate(input, lambda, n, log_degree, levels, terminal)?
        }
    };
    let convergent = value.is_finite() && tail_oscillation <= osc_tol;
    Ok(GEntry { lambda, value, terminal, tail_oscillation, convergent })
}

/// `ĝ` on `lambdas` with per-entry convergence flags; never fails on
/// non-convergence.
pub fn tabulate_limits(
    input: &KendallInput,
    group: PopaParam,
    lambdas: &[f64],
    n: usize,
    estimator: LimitEstimator,
    osc_tol: f64,
) -> Result<GHat> {
    input.check_horizon(n)?;
    if let Some(&l) = lambdas.iter().find(|&&l| !input.test_set.contains(l)) {
        return Err(Error::InvalidInput(format!("grid point {l} lies outside the test set")));
    }
    let entries = lambdas
        .par_iter()
        .map(|&l| estimate(input, l, n, estimator, osc_tol))
        .collect::<Result<Vec<_>>>()?;
    GHat::new(group, entries)
}

/// As [`tabulate_limits`], failing when no grid point converges.
pub fn sequential_limits(
    input: &KendallInput,
    group: PopaParam,
    lambdas: &[f64],
    n: usize,
    estimator: LimitEstimator,
    osc_tol: f64,
) -> Result<GHat> {
    let g = tabulate_limits(input, group, lambdas, n, estimator, osc_tol)?;
    if g.convergent().next().is_none() {
        let worst = g.entries.iter().map(|e| e.tail_oscillation).fold(f64::INFINITY, f64::min);
        return Err(Error::NonConvergent(format!(
            "no grid point settles: smallest tail oscillation {worst:.3e} exceeds {osc_tol:.1e}"
        )));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::{AnPolicy, Mode, TestSet};
    use crate::sequences::{AdmissibilityKind, Generator, SequenceSpec};

    fn input(f: &str) -> KendallInput {
        KendallInput {
            f: f.parse().unwrap(),
            seq: SequenceSpec::new(AdmissibilityKind::Multiplicative, Generator::Identity, 0),
            test_set: TestSet::interval(1.0, 2.0).unwrap(),
            a_policy: AnPolicy::Reciprocal,
            mode: Mode::Karamata,
        }
    }

    #[test]
    fn tail_indices_are_bounded() {
        let idx = tail_indices(1_000_000);
        assert!(idx.len() <= 2001);
        assert_eq!(*idx.last().unwrap(), 1_000_000);
        assert!(idx[0] >= 900_001);
        assert_eq!(tail_indices(5), vec![5]);
    }

    #[test]
    fn pure_square_is_exact() {
        let g = sequential_limits(
            &input("pow_slowvar(2, one)"),
            PopaParam::INFINITY,
            &[1.0, 1.5, 2.0],
            10_000,
            LimitEstimator::default(),
            1e-2,
        )
        .unwrap();
        for e in &g.entries {
            assert!((e.value - e.lambda * e.lambda).abs() < 1e-12);
            assert!(e.tail_oscillation < 1e-14);
        }
    }

    #[test]
    fn log_squared_factor_is_removed() {
        let lambdas = [1.0, 1.25, 1.5, 2.0];
        let inp = input("pow_slowvar(1.7, log2)");
        let g = sequential_limits(&inp, PopaParam::INFINITY, &lambdas, 1_000_000, LimitEstimator::default(), 1e-2)
            .unwrap();
        for e in &g.entries {
            let truth = e.lambda.powf(1.7);
            assert!((e.value / truth - 1.0).abs() < 1e-6, "{e:?}");
            // terminal value carries the (1 + ln λ / ln N)² bias
            let bias = (1.0 + e.lambda.ln() / 1e6f64.ln()).powi(2);
            assert!((e.terminal / (truth * bias) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn oscillation_is_flagged() {
        let err = sequential_limits(
            &input("sin_osc"),
            PopaParam::INFINITY,
            &[1.1, 1.3, 1.7],
            100_000,
            LimitEstimator::default(),
            1e-2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergent(_)));
    }

    #[test]
    fn grid_must_lie_in_test_set() {
        let r = tabulate_limits(&input("const(1)"), PopaParam::INFINITY, &[0.5], 100, LimitEstimator::Terminal, 1e-2);
        assert!(r.is_err());
    }

    #[test]
    fn lookup_is_tolerant() {
        let g = GHat::from_values(PopaParam::INFINITY, &[(1.0, 1.0), (1.5, 2.0)]).unwrap();
        assert_eq!(g.lookup(1.5 + 1e-12).unwrap().value, 2.0);
        assert!(g.lookup(1.4).is_none());
    }
}
