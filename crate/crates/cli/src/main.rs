mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::Cli;
use config::ValidationError;

const EXIT_VALIDATION: u8 = 1;
const EXIT_COMPUTATION: u8 = 2;
const THREADS_VAR: &str = "LIENARD_LAB_THREADS";

fn configure_threads() -> Result<(), ValidationError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ValidationError(vec![format!("{THREADS_VAR} must be a positive integer, got {v:?}")]))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let name = commands::command_name(&cli.command);
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            if let Some(v) = err.downcast_ref::<ValidationError>() {
                eprintln!("error: {v}");
                return ExitCode::from(EXIT_VALIDATION);
            }
            if let Some(core) = err.downcast_ref::<lienard_core::Error>() {
                let diag = json!({
                    "schema_version": output::SCHEMA_VERSION,
                    "command": name,
                    "error": { "kind": core.kind(), "message": core.to_string() },
                });
                eprintln!("{diag}");
                return ExitCode::from(if core.is_input() { EXIT_VALIDATION } else { EXIT_COMPUTATION });
            }
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_COMPUTATION)
        }
    }
}
