//! Divergent sequences: admissibility witnesses, Croftian hitting counts and
//! the φ-dilations `h_q(s) = (q ∘_φ λ) ∘_φ s`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::numeric::bisect;
use crate::rational::{rationalize, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityKind {
    /// `c_{n+1} − c_n → 0`
    Additive,
    /// `x_{n+1}/x_n → 1`
    Multiplicative,
}

impl FromStr for AdmissibilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(Self::Additive),
            "multiplicative" => Ok(Self::Multiplicative),
            other => Err(Error::InvalidInput(format!("unknown admissibility kind {other:?}"))),
        }
    }
}

/// Named sequence families; terms are indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `β log n`
    LogRamp { beta: f64 },
    /// `n^α`
    PowerRamp { alpha: f64 },
    /// `n`
    Identity,
    /// Positive rationals with denominator `≤ max_den`, by increasing size.
    Rationals { max_den: u32, farey: Vec<f64> },
    /// Explicit values `x_1, x_2, …`.
    Tabulated(Vec<f64>),
}

impl Generator {
    pub fn rationals(max_den: u32) -> Result<Self> {
        if max_den == 0 || max_den > 2000 {
            return Err(Error::InvalidInput(format!("max_den {max_den} not in 1..=2000")));
        }
        let mut farey: Vec<(u32, u32)> = Vec::new();
        for d in 1..=max_den {
            for p in 0..d {
                if gcd(p, d) == 1 {
                    farey.push((p, d));
                }
            }
        }
        farey.sort_by(|a, b| (a.0 as u64 * b.1 as u64).cmp(&(b.0 as u64 * a.1 as u64)));
        let farey = farey.into_iter().map(|(p, d)| p as f64 / d as f64).collect();
        Ok(Generator::Rationals { max_den, farey })
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::LogRamp { beta } => write!(f, "log_ramp({beta})"),
            Generator::PowerRamp { alpha } => write!(f, "power_ramp({alpha})"),
            Generator::Identity => f.write_str("identity"),
            Generator::Rationals { max_den, .. } => write!(f, "rationals({max_den})"),
            Generator::Tabulated(v) => write!(f, "tabulated[{}]", v.len()),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("unknown sequence family {s:?}"));
        if s == "identity" {
            return Ok(Generator::Identity);
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        match name.trim() {
            "log_ramp" => Ok(Generator::LogRamp { beta: arg.parse().map_err(|_| bad())? }),
            "power_ramp" => Ok(Generator::PowerRamp { alpha: arg.parse().map_err(|_| bad())? }),
            "rationals" => Generator::rationals(arg.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// A divergent sequence with its admissibility kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub kind: AdmissibilityKind,
    pub generator: Generator,
    pub length_hint: usize,
}

impl SequenceSpec {
    pub fn new(kind: AdmissibilityKind, generator: Generator, length_hint: usize) -> Self {
        Self { kind, generator, length_hint }
    }

    /// Term `x_n` for `n ≥ 1`; `NaN` past the end of tabulated data.
    pub fn term(&self, n: usize) -> f64 {
        let x = n as f64;
        match &self.generator {
            Generator::LogRamp { beta } => beta * x.ln(),
            Generator::PowerRamp { alpha } => x.powf(*alpha),
            Generator::Identity => x,
            Generator::Rationals { farey, .. } => {
                let m = farey.len();
                (n / m) as f64 + farey[n % m]
            }
            Generator::Tabulated(v) => v.get(n.wrapping_sub(1)).copied().unwrap_or(f64::NAN),
        }
    }

    /// Largest valid index, if the family is finite.
    pub fn max_index(&self) -> Option<usize> {
        match &self.generator {
            Generator::Tabulated(v) => Some(v.len()),
            _ => None,
        }
    }

    /// `x_1, …, x_len`.
    pub fn prefix(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|n| self.term(n)).collect()
    }
}

/// Finite-prefix admissibility witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub passes: bool,
    /// Largest `|c_{n+1} − c_n|` (or `|x_{n+1}/x_n − 1|`) for `n ≥ n0`.
    pub worst_gap: f64,
    /// The `n` (1-based) attaining `worst_gap`.
    pub worst_index: usize,
    pub divergence_witness: bool,
    pub verdict: &'static str,
}

/// Checks vanishing gaps (or ratios tending to 1) from index `n0` on,
/// plus a divergence witness: the prefix maximum is at least ten times the
/// magnitude of the first term.
pub fn admissibility_report(
    prefix: &[f64],
    kind: AdmissibilityKind,
    n0: usize,
    tol: f64,
) -> Result<AdmissibilityReport> {
    let n0 = n0.max(1);
    if prefix.len() < n0 + 2 {
        return Err(Error::InsufficientData(format!(
            "admissibility check from n0 = {n0} needs {} terms, got {}",
            n0 + 2,
            prefix.len()
        )));
    }
    if kind == AdmissibilityKind::Multiplicative {
        if let Some(i) = prefix.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Domain { what: "multiplicative sequence term", value: prefix[i] });
        }
    }
    let mut worst_gap = 0.0;
    let mut worst_index = n0;
    for n in n0..prefix.len() {
        let (a, b) = (prefix[n - 1], prefix[n]);
        let gap = match kind {
            AdmissibilityKind::Additive => (b - a).abs(),
            AdmissibilityKind::Multiplicative => (b / a - 1.0).abs(),
        };
        if gap > worst_gap {
            worst_gap = gap;
            worst_index = n;
        }
    }
    let max = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let divergence_witness = max >= 10.0 * prefix[0].abs() && max > prefix[0];
    let passes = worst_gap < tol && divergence_witness;
    Ok(AdmissibilityReport {
        passes,
        worst_gap,
        worst_index,
        divergence_witness,
        verdict: if passes { "consistent with admissible" } else { "not admissible on this prefix" },
    })
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("degenerate interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Unbounded part of an open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `(start, ∞)`
    HalfLine { start: f64 },
    /// `⋃_{k ≥ 0} (start + k·period + cells)` with cells inside `[0, period]`.
    Periodic { start: f64, period: f64, cells: Vec<Interval> },
}

/// Open set: finitely many bounded intervals plus an unbounded tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSet {
    pub bounded: Vec<Interval>,
    pub tail: Option<Tail>,
}

impl OpenSet {
    /// `⋃_{k ∈ ℤ} (k + a, k + b)` for `0 ≤ a < b ≤ 1`, restricted to `x > 0`.
    pub fn periodic_unit(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidInput(format!("cell ({a}, {b}) not inside [0, 1]")));
        }
        Ok(Self {
            bounded: Vec::new(),
            tail: Some(Tail::Periodic { start: 0.0, period: 1.0, cells: vec![Interval { lo: a, hi: b }] }),
        })
    }

    pub fn half_line(start: f64) -> Self {
        Self { bounded: Vec::new(), tail: Some(Tail::HalfLine { start }) }
    }

    pub fn is_unbounded(&self) -> bool {
        self.tail.is_some()
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.bounded.iter().any(|i| i.contains(x)) {
            return true;
        }
        match &self.tail {
            None => false,
            Some(Tail::HalfLine { start }) => x > *start,
            Some(Tail::Periodic { start, period, cells }) => {
                if x < *start {
                    return false;
                }
                let y = x - start;
                let phase = y - period * (y / period).floor();
                cells.iter().any(|c| c.contains(phase))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats {
    pub count: usize,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

/// Indices `n ≤ N` with `c_n + probe ∈ G` for the best probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitReport {
    pub probe: f64,
    pub hit_indices: Vec<usize>,
    pub gap_stats: Option<GapStats>,
}

impl HitReport {
    pub fn hit_count(&self) -> usize {
        self.hit_indices.len()
    }
}

fn gap_stats(hits: &[usize]) -> Option<GapStats> {
    if hits.len() < 2 {
        return None;
    }
    let gaps: Vec<usize> = hits.windows(2).map(|w| w[1] - w[0]).collect();
    Some(GapStats {
        count: gaps.len(),
        min: *gaps.iter().min().expect("non-empty"),
        max: *gaps.iter().max().expect("non-empty"),
        mean: gaps.iter().sum::<usize>() as f64 / gaps.len() as f64,
    })
}

/// Uniform interior grid of an odd number of points; the midpoint is included.
pub fn probe_grid(interval: Interval, count: usize) -> Result<Vec<f64>> {
    if count.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("probe grid size must be odd, got {count}")));
    }
    let step = (interval.hi - interval.lo) / (count + 1) as f64;
    Ok((1..=count).map(|i| interval.lo + i as f64 * step).collect())
}

fn validate_hit_inputs(g: &OpenSet, n: usize) -> Result<()> {
    if !g.is_unbounded() {
        return Err(Error::InvalidInput("target set must be unbounded above".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one term".into()));
    }
    Ok(())
}

/// Best probe `x ∈ I` (most hits among `n ≤ N`, ties to the smallest probe).
pub fn croft_hit_search(
    seq: &SequenceSpec,
    interval: Interval,
    g: &OpenSet,
    n: usize,
    probes: usize,
) -> Result<HitReport> {
    validate_hit_inputs(g, n)?;
    let terms = seq.prefix(n);
    let grid = probe_grid(interval, probes)?;
    let counts: Vec<usize> = grid
        .par_iter()
        .map(|&x| terms.iter().filter(|&&c| g.contains(c + x)).count())
        .collect();
    let best = argmax_first(&counts);
    let probe = grid[best];
    let hit_indices: Vec<usize> = terms
        .iter()
        .enumerate()
        .filter(|(_, &c)| g.contains(c + probe))
        .map(|(i, _)| i + 1)
        .collect();
    let gap_stats = gap_stats(&hit_indices);
    Ok(HitReport { probe, hit_indices, gap_stats })
}

fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub n: usize,
    pub best_probe: f64,
    pub best_count: usize,
}

/// Best-probe hit counts at increasing horizons; "infinitely often" is read
/// as strictly increasing best counts across the checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitGrowth {
    pub checkpoints: Vec<Checkpoint>,
    pub strictly_increasing: bool,
}

pub fn hit_growth(
    seq: &SequenceSpec,
    interval: Interval,
    g: &OpenSet,
    horizons: &[usize],
    probes: usize,
) -> Result<HitGrowth> {
    if horizons.windows(2).any(|w| w[1] <= w[0]) || horizons.is_empty() {
        return Err(Error::InvalidInput("horizons must be non-empty and increasing".into()));
    }
    let n_max = *horizons.last().expect("non-empty");
    validate_hit_inputs(g, n_max)?;
    let terms = seq.prefix(n_max);
    let grid = probe_grid(interval, probes)?;
    // counts[probe][checkpoint], cumulative
    let counts: Vec<Vec<usize>> = grid
        .par_iter()
        .map(|&x| {
            let mut out = Vec::with_capacity(horizons.len());
            let mut hits = 0usize;
            let mut start = 0usize;
            for &h in horizons {
                hits += terms[start..h].iter().filter(|&&c| g.contains(c + x)).count();
                start = h;
                out.push(hits);
            }
            out
        })
        .collect();
    let checkpoints: Vec<Checkpoint> = horizons
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let column: Vec<usize> = counts.iter().map(|c| c[k]).collect();
            let best = argmax_first(&column);
            Checkpoint { n, best_probe: grid[best], best_count: column[best] }
        })
        .collect();
    let strictly_increasing = checkpoints.windows(2).all(|w| w[1].best_count > w[0].best_count);
    Ok(HitGrowth { checkpoints, strictly_increasing })
}

fn positive_phi(phi: &FunctionSpec, x: f64) -> Result<f64> {
    let v = phi.try_eval(x)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Evaluation { what: format!("{phi} (must be positive)"), x })
    }
}

/// `x ∘_φ t = x + tφ(x)`.
pub fn phi_circle(phi: &FunctionSpec, x: f64, t: f64) -> Result<f64> {
    Ok(x + t * positive_phi(phi, x)?)
}

/// `h_q(s) = q + λφ(q) + s·φ(q + λφ(q))`.
pub fn phi_dilation(q: f64, lambda: f64, s: f64, phi: &FunctionSpec) -> Result<f64> {
    phi_circle(phi, phi_circle(phi, q, lambda)?, s)
}

/// Largest `|(x_{n+1} ∘_φ λ) − (x_n ∘_φ λ)|` over `n ≥ n0` (1-based).
pub fn dilation_drift(prefix: &[f64], phi: &FunctionSpec, lambda: f64, n0: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let start = n0.max(1);
    for n in start..prefix.len() {
        let a = phi_circle(phi, prefix[n - 1], lambda)?;
        let b = phi_circle(phi, prefix[n], lambda)?;
        worst = worst.max((b - a).abs());
    }
    Ok(worst)
}

/// Lower end of the bracket searched by [`phi_dilation_solve`].
pub const SOLVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationSolution {
    /// Real solution of `b/(x + λφ(x)) = 1 + a·m_λ(x)`.
    pub x: f64,
    /// Minimal-denominator rational within `q_tol` of `x`.
    pub q: Rational,
    /// `|h_q(a) − b|`, re-evaluated directly at `q`.
    pub residual: f64,
    /// Local-slope bound `|h'(x)|·|q − x| + |h_x(a) − b|`.
    pub residual_bound: f64,
}

/// `m_λ(x) = φ(x + λφ(x)) / (x + λφ(x))`.
pub fn m_lambda(phi: &FunctionSpec, lambda: f64, x: f64) -> Result<f64> {
    let y = phi_circle(phi, x, lambda)?;
    Ok(positive_phi(phi, y)? / y)
}

/// Finds a rational `q` with `h_q(a) ≈ b`.
pub fn phi_dilation_solve(
    phi: &FunctionSpec,
    lambda: f64,
    a: f64,
    b: f64,
    q_tol: f64,
) -> Result<DilationSolution> {
    if !(a >= 0.0) || !b.is_finite() || !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("need a ≥ 0, λ ≥ 0 and finite b (a={a}, λ={lambda}, b={b})")));
    }
    let residual_eq = |x: f64| -> f64 {
        match (phi_circle(phi, x, lambda), m_lambda(phi, lambda, x)) {
            (Ok(y), Ok(m)) => b / y - 1.0 - a * m,
            _ => f64::NAN,
        }
    };
    let lo = SOLVE_FLOOR;
    let min_feasible = || -> f64 {
        (0..=240)
            .map(|k| lo * 10f64.powf(k as f64 / 12.0))
            .filter_map(|x| phi_dilation(x, lambda, a, phi).ok())
            .fold(f64::INFINITY, f64::min)
    };
    let f_lo = residual_eq(lo);
    if !f_lo.is_finite() {
        return Err(Error::Evaluation { what: phi.to_string(), x: lo });
    }
    if f_lo <= 0.0 {
        return Err(Error::NoBracket { target: b, min_feasible: min_feasible() });
    }
    let mut hi = 1.0f64.max(2.0 * lo);
    while !(residual_eq(hi) < 0.0) {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoBracket { target: b, min_feasible: min_feasible() });
        }
    }
    let x = bisect(residual_eq, lo, hi)?;
    let q = rationalize(x, q_tol)?;
    let hq = phi_dilation(q.as_f64(), lambda, a, phi)?;
    let hx = phi_dilation(x, lambda, a, phi)?;
    let step = q_tol.max(1e-9 * x.abs());
    let slope = (phi_dilation(x + step, lambda, a, phi)? - phi_dilation((x - step).max(lo), lambda, a, phi)?)
        / (x + step - (x - step).max(lo));
    Ok(DilationSolution {
        x,
        q,
        residual: (hq - b).abs(),
        residual_bound: slope.abs() * (q.as_f64() - x).abs() + (hx - b).abs(),
    })
}
