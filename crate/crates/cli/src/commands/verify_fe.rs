use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regvar_core::kernel::{bg_residual_with, sample_element, sweep_cell};
use regvar_core::popa::{law_sweep, LawSweep};
use regvar_core::{EquationClass, KernelSpec, PopaParam};
use serde::Serialize;

use super::{envelope, parse_field, section, Context, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ExitStatus, Result};

/// Residuals at or below this count as exact.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct CellRow {
    r: PopaParam,
    s: PopaParam,
    kappa: f64,
    class: EquationClass,
    formula: &'static str,
    max_bg_residual: f64,
    max_form_mismatch: f64,
    value_at_t: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TableRow {
    r: PopaParam,
    cells: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Report {
    table: Vec<TableRow>,
    cells: Vec<CellRow>,
    laws: Vec<LawSweep>,
    max_residual: f64,
    exact: bool,
    broken: bool,
}

/// `K(t) + 0.01·ψ(t)²`, which leaves the identity fixed but breaks the equation.
fn broken_residual(spec: KernelSpec, trials: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let kernel = |t: f64| {
        let psi = spec.r.group_log(t).unwrap_or(f64::NAN);
        spec.eval(t).unwrap_or(f64::NAN) + 0.01 * psi * psi
    };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = sample_element(spec.r, 2.0, rng);
        let v = sample_element(spec.r, 2.0, rng);
        let w = spec.r.circle(u, v)?;
        let res = bg_residual_with(spec.r, spec.s, kernel, u, v).unwrap_or(f64::INFINITY);
        worst = worst.max(res / (1.0 + kernel(w).abs()));
    }
    Ok(worst)
}

pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<Outcome> {
    let started = Instant::now();
    let c = section(&cfg.verify_fe, "verify_fe")?;
    let parse = |list: &[String], name: &str| -> Result<Vec<PopaParam>> {
        if list.is_empty() {
            return Err(CliError::Config(format!("{name} must list at least one parameter")));
        }
        list.iter().map(|v| parse_field(v, name)).collect()
    };
    let (rs, ss) = (parse(&c.r, "r")?, parse(&c.s, "s")?);
    if c.kappa.is_empty() || c.kappa.iter().any(|k| !k.is_finite()) {
        return Err(CliError::Config("kappa must list finite values".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut cells = Vec::new();
    let mut table = Vec::new();
    for &r in &rs {
        let mut row = Vec::new();
        for &s in &ss {
            row.push(KernelSpec::new(r, s, 1.0)?.formula().to_string());
            for &kappa in &c.kappa {
                let spec = KernelSpec::new(r, s, kappa)?;
                let sweep = sweep_cell(spec, c.trials, &mut rng)?;
                let max_bg_residual =
                    if c.broken { broken_residual(spec, c.trials, &mut rng)? } else { sweep.max_bg_residual };
                let value_at_t = c.t.map(|t| spec.eval(t)).transpose()?;
                cells.push(CellRow {
                    r,
                    s,
                    kappa,
                    class: spec.class(),
                    formula: spec.formula(),
                    max_bg_residual,
                    max_form_mismatch: sweep.max_form_mismatch,
                    value_at_t,
                });
            }
        }
        table.push(TableRow { r, cells: row });
    }
    let laws = if c.law_trials > 0 {
        rs.iter().map(|&r| law_sweep(r, c.law_trials, 2.0, &mut rng)).collect::<regvar_core::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let max_residual = cells
        .iter()
        .map(|c| c.max_bg_residual.max(c.max_form_mismatch))
        .chain(laws.iter().map(LawSweep::worst))
        .fold(0.0, f64::max);
    let report = Report { table, cells, laws, max_residual, exact: max_residual <= EXACT_TOL, broken: c.broken };
    let samples = (report.cells.len() * c.trials + rs.len() * c.law_trials) as u64;
    Ok(Outcome { envelope: envelope("verify-fe", ctx, c, &report, samples, started)?, status: ExitStatus::Ok })
}
