//! Command-line runner for `fbmdiff`: reproducible runs that write a CSV or
//! JSON data artifact plus a JSON manifest.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid configuration,
//! 3 numerical certification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;

pub mod commands;
pub mod config;
pub mod output;

use config::{manifest_path, Cli, Format, RunConfig};
use output::{write_csv, write_json, Check, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// A precondition on the configuration failed.
    Validation(String),
    /// A numerical routine failed to certify its result.
    Numerical(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_INVALID,
            CliError::Numerical(_) => EXIT_CERTIFICATION,
            CliError::Other(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fbmdiff::Error> for CliError {
    fn from(e: fbmdiff::Error) -> Self {
        use fbmdiff::Error::*;
        match e {
            Tolerance { .. } | NotPositiveDefinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunSummary {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub exit_code: i32,
}

/// Executes a resolved configuration and writes the artifact and manifest.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();

    let out = commands::execute(cfg)?;
    if let Some(dir) = cfg.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Other(e.into()))?;
    }
    match cfg.format {
        Format::Csv => write_csv(&out.table, &cfg.out)?,
        Format::Json => write_json(&out.json, &cfg.out)?,
    }

    let exit_code = if out.checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_CERTIFICATION
    };
    let manifest = Manifest {
        tool: "fbmdiff",
        version: env!("CARGO_PKG_VERSION"),
        library_version: fbmdiff::VERSION,
        config: cfg,
        seed: cfg.seed,
        artifact: cfg.out.display().to_string(),
        checks: &out.checks,
        exit_code,
        started_unix_seconds: started,
        wall_time_seconds: clock.elapsed().as_secs_f64(),
    };
    write_json(&manifest, &manifest_path(&cfg.out))?;
    Ok(RunSummary {
        config: cfg.clone(),
        checks: out.checks,
        exit_code,
    })
}

/// Parses `args` (including the program name), runs, reports, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let result = cli.resolve().and_then(|cfg| run(&cfg));
    match result {
        Ok(summary) => {
            for c in &summary.checks {
                let verdict = if c.pass { "ok" } else { "FAIL" };
                match c.threshold {
                    Some(th) => println!(
                        "{:<32} {:>14.6e}  (threshold {th:e})  {verdict}",
                        c.check, c.value
                    ),
                    None => println!("{:<32} {:>14.6e}", c.check, c.value),
                }
            }
            println!("wrote {}", summary.config.out.display());
            if summary.exit_code != EXIT_OK {
                eprintln!("error: certification failed");
            }
            summary.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
