use std::time::Instant;

use regvar_core::sequences::{
    admissibility_report, hit_growth, phi_dilation_solve, AdmissibilityKind, AdmissibilityReport, DilationSolution,
    Generator, HitGrowth, Interval, OpenSet, SequenceSpec,
};
use serde::Serialize;

use super::{envelope, parse_field, resolve_function, section, Context, Outcome};
use crate::config::{require_positive, RunConfig};
use crate::error::{CliError, ExitStatus, Result};

#[derive(Debug, Serialize)]
struct Report {
    admissibility: AdmissibilityReport,
    croft: Option<HitGrowth>,
    solve: Option<DilationSolution>,
}

/// `periodic(a, b)` or `half_line(c)`.
pub fn parse_target(text: &str) -> Result<OpenSet> {
    let bad = || CliError::Config(format!("target: expected periodic(a, b) or half_line(c), got {text:?}"));
    let (name, rest) = text.trim().split_once('(').ok_or_else(bad)?;
    let args: Vec<f64> = rest
        .strip_suffix(')')
        .ok_or_else(bad)?
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match (name.trim(), args.as_slice()) {
        ("periodic", [a, b]) => OpenSet::periodic_unit(*a, *b).map_err(|e| CliError::Config(format!("target: {e}"))),
        ("half_line", [c]) => Ok(OpenSet::half_line(*c)),
        _ => Err(bad()),
    }
}

pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<Outcome> {
    let started = Instant::now();
    let c = section(&cfg.sequences, "sequences")?;
    require_positive(&[("tol", c.tol)])?;
    let generator: Generator = parse_field(&c.sequence, "sequence")?;
    let kind: AdmissibilityKind = parse_field(&c.kind, "kind")?;
    let seq = SequenceSpec::new(kind, generator, 0);
    let admissibility = admissibility_report(&seq.prefix(c.n), kind, c.n0, c.tol)?;
    let mut samples = c.n as u64;
    let croft = match &c.croft {
        Some(cr) => {
            let interval = Interval::new(cr.interval.0, cr.interval.1)
                .map_err(|e| CliError::Config(format!("croft.interval: {e}")))?;
            let growth = hit_growth(&seq, interval, &parse_target(&cr.target)?, &cr.horizons, cr.probes)?;
            samples += (cr.horizons.last().copied().unwrap_or(0) * cr.probes) as u64;
            Some(growth)
        }
        None => None,
    };
    let solve = match &c.solve {
        Some(s) => {
            let phi = resolve_function(cfg, &s.phi, "solve.phi", ctx.seed)?;
            Some(phi_dilation_solve(&phi, s.lambda, s.a, s.b, s.q_tol)?)
        }
        None => None,
    };
    let report = Report { admissibility, croft, solve };
    Ok(Outcome { envelope: envelope("sequences", ctx, c, &report, samples, started)?, status: ExitStatus::Ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_parse() {
        assert!(parse_target("periodic(0, 0.5)").unwrap().contains(3.25));
        assert!(!parse_target("periodic(0, 0.5)").unwrap().contains(3.75));
        assert!(parse_target("half_line(10)").unwrap().contains(11.0));
        assert!(parse_target("periodic(1)").is_err());
        assert!(parse_target("circle(0, 1)").is_err());
    }
}
