use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use regvar_cli::commands::{self, Context, Outcome};
use regvar_cli::config::RunConfig;
use regvar_cli::error::{CliError, ExitStatus, Result};
use regvar_cli::output::{to_json, to_text};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "regvar", version, about = "Numerical workbench for sequential regular variation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall-clock time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover kernel and index from sequential limits.
    Analyze,
    /// Residual sweeps over the kernel table and group laws.
    VerifyFe,
    /// Essential limit with an exceptional budget.
    Esslim,
    /// Admissibility, Croftian hitting, dilation solves.
    Sequences,
    /// Self-equivarying analysis of an auxiliary function.
    Phi,
    /// Tabulate a function as `x,value` CSV.
    Table,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("REGVAR_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("REGVAR_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn run(cli: &Cli) -> Result<ExitStatus> {
    configure_threads()?;
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Context { seed: cli.seed.or(cfg.seed).unwrap_or(0), timing: cli.timing };
    let driver = match cli.command {
        Command::Analyze => commands::analyze,
        Command::VerifyFe => commands::verify_fe,
        Command::Esslim => commands::esslim,
        Command::Sequences => commands::sequences,
        Command::Phi => commands::phi,
        Command::Table => {
            emit(cli, &commands::table(&cfg, &ctx)?)?;
            return Ok(ExitStatus::Ok);
        }
    };
    let Outcome { envelope, status } = driver(&cfg, &ctx)?;
    let text = match cli.format {
        Format::Json => to_json(&envelope)?,
        Format::Text => to_text(&envelope)?,
    };
    emit(cli, &text)?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = run(&cli).unwrap_or_else(|e| {
        eprintln!("regvar: {e}");
        e.exit_status()
    });
    ExitCode::from(status.code() as u8)
}
