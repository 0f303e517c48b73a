//! Command-line driver for `ternary-stab`: configuration, report emission
//! and the exit-code contract.

pub mod commands;
pub mod config;
pub mod error;

use clap::ValueEnum;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Exit};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "TERNARY_STAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    VerifyRing,
    Defect,
    Extract,
    Report,
    Bound,
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Runs `command` and renders its payload (JSON, CSV or a text table).
pub fn run(command: Command, cfg: &RunConfig) -> Result<(String, Exit), CliError> {
    Ok(match command {
        Command::VerifyRing => {
            let (o, e) = commands::verify_ring(cfg)?;
            (json(&o), e)
        }
        Command::Defect => commands::defect(cfg)?,
        Command::Extract => {
            let (o, e) = commands::extract(cfg)?;
            (json(&o), e)
        }
        Command::Report => {
            let (o, e) = commands::report(cfg)?;
            (json(&o), e)
        }
        Command::Bound => commands::bound(cfg)?,
    })
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))
}

/// Drops the run-dependent `meta` field so payloads can be compared.
pub fn strip_meta(mut v: serde_json::Value) -> serde_json::Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("meta");
    }
    v
}
