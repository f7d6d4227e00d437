//! `smoothlab` command-line front end.
//!
//! Exit codes: 0 success (every check passed), 1 a check failed,
//! 2 usage, hypothesis or input error.

mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Cli, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] smoothlab::Error),
    #[error("io error: {0}")]
    Io(String),
}

fn threads(cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var("SMOOTHLAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("SMOOTHLAB_THREADS = '{v}' is not a count"))),
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    let (command, inv) = cli.command.split();
    let base = match &inv.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.overlay(&inv.flags);
    cfg.command = Some(command);
    log::debug!("configuration {}", cfg.to_json());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads(&cfg)? {
        if t == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let artifact = pool.install(|| run::execute(command, &cfg))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &artifact.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(artifact.text.as_bytes()).and_then(|_| out.write_all(b"\n")).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(artifact.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
