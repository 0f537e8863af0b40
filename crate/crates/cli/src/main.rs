use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use lindstedt_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = serde_json::json!({
                "error": "usage",
                "invariant": null,
                "message": e.to_string().trim_end(),
                "exit_code": 1,
            });
            eprintln!("{record}");
            return ExitCode::from(1);
        }
    };
    match run(cli).context("lindstedt") {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, record) = match err.downcast_ref::<CliError>() {
                Some(e) => (e.exit_code(), e.record()),
                None => (1, serde_json::json!({ "error": "internal", "message": format!("{err:#}") })),
            };
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
