use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ternary_stab_cli::config::parse_control;
use ternary_stab_cli::{configure_threads, run, CliError, Command, Overrides, RunConfig};

/// Stability analysis of approximate ternary homomorphisms on matrix rings.
#[derive(Debug, Parser)]
#[command(name = "ternary-stab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Catalogue scenario kind, or `all`.
    #[arg(long)]
    scenario: Option<String>,
    /// Control override: `constant:DELTA`, `pnorm:EPS,P` or a JSON descriptor.
    #[arg(long, value_parser = parse_control)]
    control: Option<ternary_stab::ControlFunction>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Tolerance of the algebraic checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Report only the closed-form bounds.
    #[arg(long)]
    bound_only: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated norms for the bound table.
    #[arg(long, value_delimiter = ',')]
    norms: Option<Vec<f64>>,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        seed: cli.seed,
        d: cli.d,
        l: cli.l,
        rows: cli.rows,
        cols: cli.cols,
        scenario: cli.scenario,
        control: cli.control,
        samples: cli.samples,
        n_max: cli.n_max,
        tol: cli.tol,
        bound_only: cli.bound_only,
        eps: cli.eps,
        p: cli.p,
        delta: cli.delta,
        norms: cli.norms,
        out: cli.out,
    });
    let (text, exit) = run(cli.command, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(exit.code())
}

fn main() -> ExitCode {
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().code()
        }
    };
    ExitCode::from(code as u8)
}
