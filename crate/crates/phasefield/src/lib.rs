//! Std companion of `phasefield-core`: run configurations, a rayon
//! executor, output files (CSV, `.dat`, SVG, JSON) and the `phasefield`
//! command line.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

use std::path::Path;

use serde_json::{json, Value};

use crate::commands::Outcome;
use crate::config::{canonical_bytes, Document, RunConfig};
use crate::error::CliError;
use crate::exec::RayonExecutor;
use crate::output::{resolve_out_dir, RunDir};

pub use crate::error::CliError as Error;

/// Files a command writes besides `config.json` and `manifest.json`.
pub fn outputs_of(run: &RunConfig) -> &'static [&'static str] {
    match run {
        RunConfig::Sigma(_) => commands::SIGMA_OUTPUTS,
        RunConfig::Solve(_) => commands::SOLVE_OUTPUTS,
        RunConfig::Sweep(_) => commands::SWEEP_OUTPUTS,
        RunConfig::Tails(_) => commands::TAILS_OUTPUTS,
        RunConfig::Liouville(_) => commands::LIOUVILLE_OUTPUTS,
        RunConfig::Lamp(_) => commands::LAMP_OUTPUTS,
    }
}

/// Runs a validated document into `dir` and returns the exit code. The
/// manifest is written first; `summary.json` is written last, also on error.
pub fn execute(doc: &Document, dir: &RunDir, jobs: usize) -> i32 {
    let command = doc.run.command();
    let bytes = canonical_bytes(doc);
    let result = dir
        .start(command, &bytes, doc.run.seed0(), outputs_of(&doc.run))
        .and_then(|_| run_command(doc, dir, jobs));
    finish(dir, command, Some(output::sha256_hex(&bytes)), result)
}

fn run_command(doc: &Document, dir: &RunDir, jobs: usize) -> Result<Outcome, CliError> {
    let exec = RayonExecutor::new(jobs).map_err(|e| CliError::Config(e.to_string()))?;
    match &doc.run {
        RunConfig::Sigma(c) => commands::sigma(c),
        RunConfig::Solve(c) => commands::solve(c, dir),
        RunConfig::Sweep(c) => commands::sweep(&exec, c, dir),
        RunConfig::Tails(c) => commands::tails(&exec, c, dir),
        RunConfig::Liouville(c) => commands::liouville(c, dir),
        RunConfig::Lamp(c) => commands::lamp(&exec, c, dir),
    }
}

/// Writes `summary.json` and maps the result to an exit code.
pub fn finish(dir: &RunDir, command: &str, config_hash: Option<String>, result: Result<Outcome, CliError>) -> i32 {
    let (status, code, error, body) = match result {
        Ok(o) if o.partial_failure => ("partial_failure", 1, Some("sample failures above threshold".to_string()), o.summary),
        Ok(o) => ("ok", 0, None, o.summary),
        Err(e) => ("error", e.exit_code(), Some(e.to_string()), Value::Null),
    };
    let summary = json!({
        "command": command,
        "status": status,
        "exit_code": code,
        "error": error,
        "config_hash": config_hash,
        "result": body,
    });
    if let Some(e) = &error {
        eprintln!("{command}: {e}");
    }
    if let Err(e) = dir.write_json("summary.json", &summary) {
        eprintln!("{command}: cannot write summary: {e}");
        return code.max(1);
    }
    code
}

/// Mirrors an error raised before a document exists into `summary.json`.
pub fn fail_early(out: Option<&Path>, command: &str, err: CliError) -> i32 {
    let code = err.exit_code();
    match RunDir::create(resolve_out_dir(out, command)) {
        Ok(dir) => finish(&dir, command, None, Err(err)).max(code),
        Err(e) => {
            eprintln!("{command}: {err}; cannot create output directory: {e}");
            code
        }
    }
}
