//! Essential limits on a finite grid. The exceptional set is modelled by a
//! point-fraction budget δ: beyond `X_ε`, every tail window of at least a
//! tenth of the samples may hold at most a fraction δ of points with
//! `|f − L| ≥ ε`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::numeric::median;

pub const MIN_SAMPLES: usize = 1000;
pub const DEFAULT_DELTA: f64 = 0.005;
pub const DEFAULT_EPSILONS: [f64; 3] = [0.1, 0.03, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    points: Vec<(f64, f64)>,
    source: String,
}

impl SampledFunction {
    pub fn new(points: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        if let Some(w) = points.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput(format!("sample abscissae not increasing at x = {}", w[1].0)));
        }
        if let Some(&(x, y)) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Evaluation { what: format!("non-finite sample {y}"), x });
        }
        Ok(Self { points, source: source.into() })
    }

    /// Samples `f` on `xs`; undefined values are an error.
    pub fn from_spec(f: &FunctionSpec, xs: &[f64]) -> Result<Self> {
        let points = xs.iter().map(|&x| Ok((x, f.try_eval(x)?))).collect::<Result<Vec<_>>>()?;
        Self::new(points, f.to_string())
    }

    pub fn from_fn(xs: &[f64], f: impl Fn(f64) -> f64, source: impl Into<String>) -> Result<Self> {
        Self::new(xs.iter().map(|&x| (x, f(x))).collect(), source)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Pointwise combination on a shared grid.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64, source: &str) -> Result<Self> {
        if self.len() != other.len() || self.xs().zip(other.xs()).any(|(a, b)| a != b) {
            return Err(Error::InvalidInput("samples must share the same x grid".into()));
        }
        let points = self.points.iter().zip(&other.points).map(|(a, b)| (a.0, op(a.1, b.1))).collect();
        Self::new(points, source)
    }
}

/// Geometric grid of `n` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    /// Abscissa `X_ε`; `None` when no tail window certifies ε.
    pub x_eps: Option<f64>,
    pub index: Option<usize>,
    /// Violation fraction beyond `X_ε` (or in the shortest tail window when
    /// uncertified).
    pub exceptional_fraction: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssLimResult {
    pub limit: Option<f64>,
    pub candidate: f64,
    pub epsilon_profile: Vec<EpsilonRow>,
    pub verdict: Verdict,
    pub delta: f64,
}

fn validate(samples: &SampledFunction, epsilons: &[f64], delta: f64) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "essential limit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("epsilons must be positive and strictly decreasing".into()));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidInput(format!("budget δ = {delta} not in [0, 0.5)")));
    }
    Ok(())
}

/// Certifies `limit` against each ε; independent of how the candidate was chosen.
pub fn certify(samples: &SampledFunction, limit: f64, epsilons: &[f64], delta: f64) -> Result<Vec<EpsilonRow>> {
    validate(samples, epsilons, delta)?;
    let values: Vec<f64> = samples.values().collect();
    let n = values.len();
    let min_window = n / 10;
    let last_start = n - min_window;
    Ok(epsilons
        .iter()
        .map(|&eps| {
            // suffix[i] = violations among i..n
            let mut suffix = vec![0usize; n + 1];
            for i in (0..n).rev() {
                suffix[i] = suffix[i + 1] + usize::from((values[i] - limit).abs() >= eps);
            }
            let frac = |i: usize| suffix[i] as f64 / (n - i) as f64;
            let mut start = None;
            for i in (0..=last_start).rev() {
                if frac(i) <= delta {
                    start = Some(i);
                } else {
                    break;
                }
            }
            match start {
                Some(i) => EpsilonRow {
                    epsilon: eps,
                    x_eps: Some(samples.points[i].0),
                    index: Some(i),
                    exceptional_fraction: frac(i),
                    violations: suffix[i],
                },
                None => EpsilonRow {
                    epsilon: eps,
                    x_eps: None,
                    index: None,
                    exceptional_fraction: frac(last_start),
                    violations: suffix[last_start],
                },
            }
        })
        .collect())
}

pub fn ess_lim(samples: &SampledFunction, epsilons: &[f64], delta: f64) -> Result<EssLimResult> {
    validate(samples, epsilons, delta)?;
    let values: Vec<f64> = samples.values().collect();
    let decile = &values[values.len() - values.len() / 10..];
    let candidate = median(decile).expect("non-empty decile");
    let epsilon_profile = certify(samples, candidate, epsilons, delta)?;
    let certified: Vec<bool> = epsilon_profile.iter().map(|r| r.index.is_some()).collect();
    let verdict = if certified.iter().all(|&c| c) {
        Verdict::Converges
    } else if !certified[0] {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    };
    Ok(EssLimResult {
        limit: (verdict == Verdict::Converges).then_some(candidate),
        candidate,
        epsilon_profile,
        verdict,
        delta,
    })
}

/// One combined quantity (sum or product) against the closure law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureRow {
    pub predicted: f64,
    /// Essential limit of the combined samples under budget `δ_f + δ_g`.
    pub observed: Option<f64>,
    pub matches: bool,
    /// Per-ε: violations of the combined function at the widened tolerance
    /// beyond `max(X_ε^f, X_ε^g)`, and the bound `count_f + count_g`.
    pub union_counts: Vec<(usize, usize)>,
    pub union_bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombineReport {
    pub limit_f: f64,
    pub limit_g: f64,
    pub budget: f64,
    pub sum: ClosureRow,
    pub product: ClosureRow,
}

fn closure_row(
    [(f, rf), (g, rg)]: [(&SampledFunction, &EssLimResult); 2],
    combined: &SampledFunction,
    predicted: f64,
    widen: impl Fn(f64) -> f64,
    epsilons: &[f64],
    budget: f64,
) -> Result<ClosureRow> {
    let (lf, lg) = (rf.candidate, rg.candidate);
    let mut union_counts = Vec::with_capacity(epsilons.len());
    for (k, &eps) in epsilons.iter().enumerate() {
        let start = rf.epsilon_profile[k].index.max(rg.epsilon_profile[k].index).expect("certified");
        let count = |s: &SampledFunction, l: f64, e: f64| {
            s.points[start..].iter().filter(|p| (p.1 - l).abs() >= e).count()
        };
        union_counts.push((count(combined, predicted, widen(eps)), count(f, lf, eps) + count(g, lg, eps)));
    }
    let union_bound_holds = union_counts.iter().all(|(c, b)| c <= b);
    let res = ess_lim(combined, epsilons, budget.min(0.499))?;
    let smallest = *epsilons.last().expect("non-empty");
    let observed = res.limit;
    let matches = observed.is_some_and(|l| (l - predicted).abs() < widen(smallest));
    Ok(ClosureRow { predicted, observed, matches, union_counts, union_bound_holds })
}

/// Sums and products of essential limits, with budgets adding under union.
pub fn ess_lim_combine_check(
    f: &SampledFunction,
    g: &SampledFunction,
    epsilons: &[f64],
    delta_f: f64,
    delta_g: f64,
) -> Result<CombineReport> {
    let rf = ess_lim(f, epsilons, delta_f)?;
    let rg = ess_lim(g, epsilons, delta_g)?;
    for (name, r) in [("f", &rf), ("g", &rg)] {
        if r.verdict != Verdict::Converges {
            return Err(Error::NonConvergent(format!("essential limit of {name} is {:?}", r.verdict)));
        }
    }
    let (lf, lg) = (rf.candidate, rg.candidate);
    let budget = delta_f + delta_g;
    let sum = f.zip_with(g, |a, b| a + b, "sum")?;
    let product = f.zip_with(g, |a, b| a * b, "product")?;
    Ok(CombineReport {
        limit_f: lf,
        limit_g: lg,
        budget,
        sum: closure_row([(f, &rf), (g, &rg)], &sum, lf + lg, |e| 2.0 * e, epsilons, budget)?,
        product: closure_row(
            [(f, &rf), (g, &rg)],
            &product,
            lf * lg,
            |e| e * (lf.abs() + lg.abs() + e),
            epsilons,
            budget,
        )?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementReport {
    pub limit_u: f64,
    pub limit_v: f64,
    pub limit_uv: f64,
    pub defect: f64,
    pub holds: bool,
}

/// Increments `h(x + u) − h(x)` compose additively in the limit.
pub fn increment_additivity_check(
    h: impl Fn(f64) -> f64,
    xs: &[f64],
    u: f64,
    v: f64,
    epsilons: &[f64],
    delta: f64,
) -> Result<IncrementReport> {
    let lim = |step: f64| -> Result<f64> {
        let s = SampledFunction::from_fn(xs, |x| h(x + step) - h(x), format!("increment {step}"))?;
        let r = ess_lim(&s, epsilons, delta)?;
        r.limit.ok_or_else(|| Error::NonConvergent(format!("increment {step}: {:?}", r.verdict)))
    };
    let (limit_u, limit_v, limit_uv) = (lim(u)?, lim(v)?, lim(u + v)?);
    let defect = (limit_uv - limit_u - limit_v).abs();
    let smallest = *epsilons.last().expect("validated");
    Ok(IncrementReport { limit_u, limit_v, limit_uv, defect, holds: defect < 3.0 * smallest })
}
