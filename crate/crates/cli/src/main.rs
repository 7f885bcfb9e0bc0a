mod args;
mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde_json::{json, Map, Value};

use args::{Cli, Command, Diag};
use commands::Outcome;

pub const SCHEMA_VERSION: &str = "1.0.0";
const THREADS_ENV: &str = "GAUSSPRG_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A required option is missing; reported with usage text.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gaussprg_core::Error),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: &Cli, file: Option<&Map<String, Value>>) -> Result<Outcome, CliError> {
    use config::merge;
    match &cli.command {
        Command::Params(a) => commands::params(merge(a, file)?),
        Command::Gen(a) => commands::gen(merge(a, file)?),
        Command::Fool(a) => commands::fool(merge(a, file)?),
        Command::Diag(Diag::Independence(a)) => commands::independence(merge(a, file)?),
        Command::Diag(Diag::Coupling(a)) => commands::coupling(merge(a, file)?),
        Command::Diag(Diag::Anticonc(a)) => commands::anticonc(merge(a, file)?),
        Command::Diag(Diag::Lemmas(a)) => commands::lemmas(merge(a, file)?),
        Command::Diag(Diag::Mollifier(a)) => commands::mollifier(merge(a, file)?),
    }
}

fn report(cli: &Cli, outcome: Outcome) -> Value {
    let mut config = outcome.config;
    config["out_path"] = json!(cli.out);
    config["config_path"] = json!(cli.config);
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "gaussprg", "version": env!("CARGO_PKG_VERSION")},
        "command": outcome.command,
        "config": config,
        "master_seed": outcome.master_seed,
        "pass": outcome.pass,
        "result": outcome.result,
    })
}

fn emit(cli: &Cli, report: &Value) -> Result<(), CliError> {
    let mut text = if cli.pretty {
        serde_json::to_string_pretty(report)
    } else {
        serde_json::to_string(report)
    }
    .expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| cli.config.as_deref().map(config::load).transpose())
        .and_then(|file| run(&cli, file.as_ref()))
        .and_then(|outcome| {
            let pass = outcome.pass;
            emit(&cli, &report(&cli, outcome))?;
            Ok(pass)
        });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => Cli::command().error(ErrorKind::MissingRequiredArgument, msg).exit(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
