//! `projabs`: ground, expand, abstract, check and solve from the shell.
//!
//! Exit codes: 0 when everything ran and every check passed, 1 when a check
//! failed (its witness is in the report), 2 on usage, input or parse errors.

mod args;
mod run;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match run::run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.output.output {
        Some(path) => fs::write(path, &outcome.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.passed { 0 } else { 1 })
}
