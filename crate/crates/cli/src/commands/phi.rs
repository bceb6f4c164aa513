use std::time::Instant;

use regvar_core::phi::{default_x_grid, estimate_rho_with_tol, uniform_t_grid};

use super::{envelope, resolve_function, section, Context, Outcome};
use crate::config::{require_positive, RunConfig};
use crate::error::{ExitStatus, Result};

pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<Outcome> {
    let started = Instant::now();
    let c = section(&cfg.phi, "phi")?;
    require_positive(&[("t_max", c.t_max), ("tol", c.tol)])?;
    let phi = resolve_function(cfg, &c.phi, "phi", ctx.seed)?;
    let xg = c.x_grid.clone().unwrap_or_else(default_x_grid);
    let tg = uniform_t_grid(c.t_max, c.t_points);
    let analysis = estimate_rho_with_tol(&phi, &xg, &tg, c.tol)?;
    let samples = (xg.len() * tg.len()) as u64;
    Ok(Outcome { envelope: envelope("phi", ctx, c, &analysis, samples, started)?, status: ExitStatus::Ok })
}
