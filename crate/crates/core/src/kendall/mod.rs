//! Sequential detection of regular variation: limits `a_n f(λ ∘ x_n)` on a
//! test set, the kernel they induce, its index, and the diagnostics built on
//! top (restricted Cauchy residuals, constancy segments, uniformity, the
//! differenced general setting).

mod corollary;
mod general;
mod kernel_fit;
mod limits;
mod pipeline;
mod uct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::popa::PopaParam;
use crate::sequences::SequenceSpec;

pub use corollary::{verify_corollary, CorollaryReport};
pub use general::{general_rv_estimate, GeneralReport};
pub use kernel_fit::{
    constancy_segments, feasible_window, fit_index, kernel_estimate, res_cfe_check, IndexFit, KEntry, KHat,
    ResCfeReport, ResCfeRow, Segment,
};
pub use limits::{checkpoints, sequential_limits, tabulate_limits, GEntry, GHat, LimitEstimator};
pub use pipeline::{analyze, lattice, AnalysisOptions, ConvergenceReport, Status, UctOptions};
pub use uct::{uct_diagnostic, UniformityProfile};

/// Closed base interval with open subintervals removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSet {
    pub base: (f64, f64),
    #[serde(default)]
    pub holes: Vec<(f64, f64)>,
}

impl TestSet {
    pub fn new(base: (f64, f64), mut holes: Vec<(f64, f64)>) -> Result<Self> {
        let (lo, hi) = base;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("test set base [{lo}, {hi}] is degenerate")));
        }
        holes.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &holes {
            if !(a < b) || a < lo || b > hi {
                return Err(Error::InvalidInput(format!("hole ({a}, {b}) not inside [{lo}, {hi}]")));
            }
        }
        if holes.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidInput("holes overlap".into()));
        }
        let set = Self { base, holes };
        if !(set.measure() > 0.0) {
            return Err(Error::InvalidInput("test set has no length left".into()));
        }
        Ok(set)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new((lo, hi), Vec::new())
    }

    /// `count` equal holes removing `fraction` of the base length, centred
    /// at the interior points `lo + k(hi − lo)/(count + 1)`.
    pub fn with_even_holes(lo: f64, hi: f64, fraction: f64, count: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::InvalidInput(format!("hole fraction {fraction} not in [0, 1)")));
        }
        let len = hi - lo;
        let width = fraction * len / count.max(1) as f64;
        let holes = (1..=count)
            .map(|k| {
                let c = lo + k as f64 * len / (count + 1) as f64;
                (c - width / 2.0, c + width / 2.0)
            })
            .collect();
        Self::new((lo, hi), holes)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.base.0 && x <= self.base.1 && !self.holes.iter().any(|&(a, b)| x > a && x < b)
    }

    /// True when some hole meets the open segment `(x, y)`.
    pub fn hole_between(&self, x: f64, y: f64) -> bool {
        self.holes.iter().any(|&(a, b)| a < y && b > x)
    }

    pub fn measure(&self) -> f64 {
        (self.base.1 - self.base.0) - self.holes.iter().map(|(a, b)| b - a).sum::<f64>()
    }
}

/// How the normalising constants `a_n` are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum AnPolicy {
    /// `1/f(x_n)` (`1/h(x_n)` in the general setting).
    Reciprocal,
    /// Explicit `a_1, a_2, …`.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Arguments `λ·x_n`.
    Karamata,
    /// Arguments `x_n + tφ(x_n)`.
    Beurling { phi: FunctionSpec },
    /// Differences `f(x_n + tφ(x_n)) − f(x_n)` scaled by `a_n`.
    General { phi: FunctionSpec, h: FunctionSpec },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Karamata => "karamata",
            Mode::Beurling { .. } => "beurling",
            Mode::General { .. } => "general",
        }
    }

    pub fn phi(&self) -> Option<&FunctionSpec> {
        match self {
            Mode::Karamata => None,
            Mode::Beurling { phi } | Mode::General { phi, .. } => Some(phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KendallInput {
    pub f: FunctionSpec,
    pub seq: SequenceSpec,
    pub test_set: TestSet,
    pub a_policy: AnPolicy,
    pub mode: Mode,
}

impl KendallInput {
    fn phi_at(&self, phi: &FunctionSpec, x: f64) -> Result<f64> {
        let v = phi.try_eval(x)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Evaluation { what: format!("{phi} (must be positive)"), x })
        }
    }

    /// The point `λ ∘ x`: `λx` or `x + λφ(x)`.
    pub fn argument(&self, x: f64, lambda: f64) -> Result<f64> {
        match &self.mode {
            Mode::Karamata => Ok(lambda * x),
            Mode::Beurling { phi } | Mode::General { phi, .. } => Ok(x + lambda * self.phi_at(phi, x)?),
        }
    }

    /// `a_n` at index `n ≥ 1` with `x = x_n`.
    pub fn a_n(&self, n: usize, x: f64) -> Result<f64> {
        let a = match &self.a_policy {
            AnPolicy::Reciprocal => {
                let denom = match &self.mode {
                    Mode::General { h, .. } => h.try_eval(x)?,
                    _ => self.f.try_eval(x)?,
                };
                if denom == 0.0 {
                    return Err(Error::Singular { what: "reciprocal normaliser", value: x });
                }
                1.0 / denom
            }
            AnPolicy::Given(v) => *v.get(n.wrapping_sub(1)).ok_or_else(|| {
                Error::InsufficientData(format!("a_n given for {} indices, index {n} requested", v.len()))
            })?,
        };
        if a.is_finite() {
            Ok(a)
        } else {
            Err(Error::Evaluation { what: "a_n".into(), x })
        }
    }

    /// `a_n f(λ ∘ x_n)`, or `a_n [f(λ ∘ x_n) − f(x_n)]` in the general setting.
    pub fn term(&self, n: usize, lambda: f64) -> Result<f64> {
        let x = self.x_n(n)?;
        let a = self.a_n(n, x)?;
        let y = self.f.try_eval(self.argument(x, lambda)?)?;
        Ok(match self.mode {
            Mode::General { .. } => a * (y - self.f.try_eval(x)?),
            _ => a * y,
        })
    }

    pub fn x_n(&self, n: usize) -> Result<f64> {
        let x = self.seq.term(n);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::InsufficientData(format!("sequence has no term at index {n}")))
        }
    }

    /// Largest usable index: bounded by tabulated sequences and given `a_n`.
    pub fn max_index(&self) -> Option<usize> {
        let given = match &self.a_policy {
            AnPolicy::Given(v) => Some(v.len()),
            AnPolicy::Reciprocal => None,
        };
        match (self.seq.max_index(), given) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub(crate) fn check_horizon(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("horizon N = {n} too small")));
        }
        match self.max_index() {
            Some(m) if m < n => Err(Error::InsufficientData(format!("horizon N = {n} exceeds available {m} terms"))),
            _ => Ok(()),
        }
    }
}

/// Group acting on the λ argument: multiplication for the Karamata setting.
pub fn karamata_group() -> PopaParam {
    PopaParam::INFINITY
}
