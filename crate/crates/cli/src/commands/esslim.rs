use std::time::Instant;

use regvar_core::esslim::{
    ess_lim, ess_lim_combine_check, geometric_grid, increment_additivity_check, CombineReport, EssLimResult,
    IncrementReport, SampledFunction, Verdict,
};
use regvar_core::FunctionSpec;
use serde::Serialize;

use super::{envelope, resolve_function, section, spikes, Context, Outcome, SpikeInfo};
use crate::config::{require_positive, EsslimConfig, GridKind, RunConfig};
use crate::error::{CliError, ExitStatus, Result};

#[derive(Debug, Serialize)]
struct Report {
    samples: usize,
    spikes: Vec<SpikeInfo>,
    ess_lim: EssLimResult,
    combine: Option<CombineReport>,
    increment: Option<IncrementReport>,
}

fn grid(c: &EsslimConfig) -> Result<Vec<f64>> {
    require_positive(&[("x_lo", c.x_lo), ("x_hi", c.x_hi)])?;
    if !(c.x_hi > c.x_lo) || c.samples < 2 {
        return Err(CliError::Config("need x_lo < x_hi and at least two samples".into()));
    }
    Ok(match c.grid {
        GridKind::Geometric => geometric_grid(c.x_lo, c.x_hi, c.samples),
        GridKind::Uniform => {
            (0..c.samples).map(|i| c.x_lo + (c.x_hi - c.x_lo) * i as f64 / (c.samples - 1) as f64).collect()
        }
    })
}

fn sample(f: &FunctionSpec, xs: &[f64]) -> Result<SampledFunction> {
    Ok(match f {
        FunctionSpec::Tabulated(t) => SampledFunction::new(t.points().collect(), t.source())?,
        other => SampledFunction::from_spec(other, xs)?,
    })
}

pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<Outcome> {
    let started = Instant::now();
    let c = section(&cfg.esslim, "esslim")?;
    require_positive(&c.epsilons.iter().map(|&e| ("epsilons", e)).collect::<Vec<_>>())?;
    let f = resolve_function(cfg, &c.f, "f", ctx.seed)?;
    let xs = grid(c)?;
    let fs = sample(&f, &xs)?;
    let result = ess_lim(&fs, &c.epsilons, c.delta)?;
    let mut all_spikes = spikes(&f);
    let combine = match &c.g {
        Some(g) => {
            let g = resolve_function(cfg, g, "g", ctx.seed.wrapping_add(1))?;
            all_spikes.extend(spikes(&g));
            let gs = sample(&g, &xs)?;
            if gs.len() != fs.len() {
                return Err(CliError::Config("f and g must share the sample grid".into()));
            }
            Some(ess_lim_combine_check(&fs, &gs, &c.epsilons, c.delta, c.delta_g)?)
        }
        None => None,
    };
    let increment = c
        .increment
        .map(|(u, v)| increment_additivity_check(|x| f.eval(x), &xs, u, v, &c.epsilons, c.delta))
        .transpose()?;
    let status = if result.verdict == Verdict::Converges { ExitStatus::Ok } else { ExitStatus::NonConvergent };
    let report = Report { samples: fs.len(), spikes: all_spikes, ess_lim: result, combine, increment };
    Ok(Outcome { envelope: envelope("esslim", ctx, c, &report, report.samples as u64, started)?, status })
}
