//! Subcommand drivers. Each returns a report envelope and an exit status.

mod analyze;
mod esslim;
mod phi;
mod sequences;
mod table;
mod verify_fe;

use std::time::Instant;

use regvar_core::FunctionSpec;
use serde::Serialize;

use crate::config::RunConfig;
use crate::csv_io;
use crate::error::{CliError, ExitStatus, Result};
use crate::output::{Accounting, Envelope, REPORT_VERSION};

pub use analyze::run as analyze;
pub use esslim::run as esslim;
pub use phi::run as phi;
pub use sequences::run as sequences;
pub use table::run as table;
pub use verify_fe::run as verify_fe;

#[derive(Debug, Clone, Copy, Default)]
pub struct Context {
    pub seed: u64,
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub envelope: Envelope,
    pub status: ExitStatus,
}

pub(crate) fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}

/// Builtin expression or `csv:<path>`; spike placement follows the seed.
pub(crate) fn resolve_function(cfg: &RunConfig, text: &str, field: &str, seed: u64) -> Result<FunctionSpec> {
    if text.trim().is_empty() {
        return Err(CliError::Config(format!("{field} is required")));
    }
    if let Some(path) = text.strip_prefix("csv:") {
        return Ok(FunctionSpec::Tabulated(csv_io::read_function(&cfg.resolve(path.trim()))?));
    }
    let spec: FunctionSpec = text.parse().map_err(|e| CliError::Config(format!("{field}: {e}")))?;
    Ok(spec.with_seed(seed))
}

pub(crate) fn parse_field<T: std::str::FromStr>(text: &str, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e| CliError::Config(format!("{field}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpikeInfo {
    pub fraction: f64,
    pub height: f64,
    pub seed: u64,
}

pub(crate) fn spikes(f: &FunctionSpec) -> Vec<SpikeInfo> {
    match f {
        FunctionSpec::Spiked { base, fraction, height, seed } => {
            let mut v = vec![SpikeInfo { fraction: *fraction, height: *height, seed: *seed }];
            v.extend(spikes(base));
            v
        }
        FunctionSpec::OscPerturbed(g) => spikes(g),
        _ => Vec::new(),
    }
}

pub(crate) fn envelope<C: Serialize, R: Serialize>(
    command: &'static str,
    ctx: &Context,
    config: &C,
    result: &R,
    samples: u64,
    started: Instant,
) -> Result<Envelope> {
    Ok(Envelope {
        version: REPORT_VERSION,
        command,
        seed: ctx.seed,
        config: serde_json::to_value(config)?,
        result: serde_json::to_value(result)?,
        accounting: Accounting {
            samples,
            wall_clock_seconds: ctx.timing.then(|| started.elapsed().as_secs_f64()),
        },
    })
}
