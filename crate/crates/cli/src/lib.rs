//! Batch front end for quadrelax: argument and config handling, curve
//! ingestion, command dispatch and report emission.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod report;

pub use args::{parse_invocation, Cli, Command};
pub use commands::{execute, Outcome};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use report::{parse_document, Document};

/// Resolve the configuration, run the command and emit its report.
/// Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> CliResult<i32> {
    let cfg = RunConfig::resolve(cli)?;
    let outcome = execute(cli, &cfg)?;
    match &cfg.out {
        Some(dir) => outcome.document.write_dir(dir, cfg.raw)?,
        None => stdout
            .write_all(outcome.document.render(cfg.raw).as_bytes())
            .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?,
    }
    Ok(if outcome.ok { 0 } else { 1 })
}
