use std::time::Instant;

use regvar_core::kendall::{
    analyze, AnPolicy, AnalysisOptions, KendallInput, LimitEstimator, Mode, Status, TestSet, UctOptions,
};
use regvar_core::sequences::{AdmissibilityKind, Generator, SequenceSpec};

use super::{envelope, parse_field, resolve_function, section, Context, Outcome};
use crate::config::{require_positive, AnalyzeConfig, EstimatorName, ModeName, RunConfig};
use crate::csv_io;
use crate::error::{CliError, ExitStatus, Result};

fn test_set(a: &AnalyzeConfig) -> Result<TestSet> {
    let t = &a.test_set;
    let set = match t.hole_fraction {
        Some(_) if !t.holes.is_empty() => {
            return Err(CliError::Config("test_set: give either holes or hole_fraction, not both".into()))
        }
        Some(frac) => TestSet::with_even_holes(t.base.0, t.base.1, frac, t.hole_count),
        None => TestSet::new(t.base, t.holes.clone()),
    };
    set.map_err(|e| CliError::Config(format!("test_set: {e}")))
}

fn input(cfg: &RunConfig, a: &AnalyzeConfig, seed: u64) -> Result<KendallInput> {
    let f = resolve_function(cfg, &a.f, "f", seed)?;
    let aux = |v: &Option<String>, name: &str| -> Result<_> {
        let text = v.as_deref().ok_or_else(|| CliError::Config(format!("mode {:?} needs {name}", a.mode)))?;
        resolve_function(cfg, text, name, seed)
    };
    let mode = match a.mode {
        ModeName::Karamata => Mode::Karamata,
        ModeName::Beurling => Mode::Beurling { phi: aux(&a.phi, "phi")? },
        ModeName::General => Mode::General { phi: aux(&a.phi, "phi")?, h: aux(&a.h, "h")? },
    };
    let generator: Generator = parse_field(&a.sequence, "sequence")?;
    let kind: AdmissibilityKind = parse_field(&a.sequence_kind, "sequence_kind")?;
    let a_policy = match a.a_n.trim() {
        "reciprocal" => AnPolicy::Reciprocal,
        other => match other.strip_prefix("csv:") {
            Some(path) => AnPolicy::Given(csv_io::read_weights(&cfg.resolve(path.trim()))?),
            None => return Err(CliError::Config(format!("a_n: expected `reciprocal` or `csv:<path>`, got {other:?}"))),
        },
    };
    Ok(KendallInput { f, seq: SequenceSpec::new(kind, generator, 0), test_set: test_set(a)?, a_policy, mode })
}

fn options(cfg: &RunConfig, a: &AnalyzeConfig, seed: u64) -> Result<AnalysisOptions> {
    require_positive(&[
        ("osc_tol", a.osc_tol),
        ("budget", a.budget),
        ("segment_tol", a.segment_tol),
        ("corollary_tol", a.corollary_tol),
        ("uct_tol", a.uct_tol),
        ("trivial_tol", a.trivial_tol),
        ("sigma_tol", a.sigma_tol),
        ("phi_tol", a.phi_tol),
    ])?;
    let ell = a.ell.as_deref().map(|e| resolve_function(cfg, e, "ell", seed)).transpose()?;
    Ok(AnalysisOptions {
        n: a.n,
        lattice_points: a.lattice_points,
        s_span: a.s_span,
        estimator: match a.estimator {
            EstimatorName::Terminal => LimitEstimator::Terminal,
            EstimatorName::Extrapolated => LimitEstimator::Extrapolated { log_degree: a.log_degree, levels: a.levels },
        },
        osc_tol: a.osc_tol,
        budget: a.budget,
        segment_tol: a.segment_tol,
        ell,
        corollary_tol: a.corollary_tol,
        uct: a.uct.then(|| UctOptions { points: a.uct_points, ladder: a.uct_ladder.clone(), tol: a.uct_tol }),
        trivial_tol: a.trivial_tol,
        sigma_tol: a.sigma_tol,
        phi_tol: a.phi_tol,
    })
}

pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<Outcome> {
    let started = Instant::now();
    let a = section(&cfg.analyze, "analyze")?;
    let input = input(cfg, a, ctx.seed)?;
    let opts = options(cfg, a, ctx.seed)?;
    let report = analyze(&input, &opts)?;
    let status = match report.status {
        Status::Converged => ExitStatus::Ok,
        Status::NonConvergent => ExitStatus::NonConvergent,
        Status::Trivial => ExitStatus::Trivial,
        Status::EmptyAnchors => ExitStatus::EmptyAnchors,
    };
    let samples = (a.n * report.g_hat.len().max(1)) as u64;
    Ok(Outcome { envelope: envelope("analyze", ctx, a, &report, samples, started)?, status })
}
