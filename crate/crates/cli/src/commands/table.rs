use regvar_core::esslim::geometric_grid;

use super::{resolve_function, section, Context};
use crate::config::{require_positive, GridKind, RunConfig};
use crate::csv_io;
use crate::error::{CliError, Result};

/// Tabulates a function as `x,value` CSV.
pub fn run(cfg: &RunConfig, ctx: &Context) -> Result<String> {
    let c = section(&cfg.table, "table")?;
    require_positive(&[("x_hi", c.x_hi)])?;
    if !(c.x_hi > c.x_lo) || c.points < 2 {
        return Err(CliError::Config("need x_lo < x_hi and at least two points".into()));
    }
    let f = resolve_function(cfg, &c.f, "f", ctx.seed)?;
    let xs: Vec<f64> = match c.grid {
        GridKind::Geometric => {
            require_positive(&[("x_lo", c.x_lo)])?;
            geometric_grid(c.x_lo, c.x_hi, c.points)
        }
        GridKind::Uniform => {
            (0..c.points).map(|i| c.x_lo + (c.x_hi - c.x_lo) * i as f64 / (c.points - 1) as f64).collect()
        }
    };
    let points: Vec<(f64, f64)> = xs.iter().map(|&x| Ok((x, f.try_eval(x)?))).collect::<regvar_core::Result<_>>()?;
    let mut buf = Vec::new();
    csv_io::write_function(&mut buf, points)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
