//! `robinspec` command-line tool: JSON reports on standard output (or
//! `--out`) with CSV side files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid flags or config,
//! 3 solver failure (diagnostic JSON on standard error).

mod commands;
mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use commands::Report;
use config::{Cli, RunConfig};

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn emit(cfg: &RunConfig, report: Report) -> Result<(), String> {
    match report {
        Report::Json { mut body, csv } => {
            let csv_path = csv.as_ref().and_then(|_| cfg.csv_path());
            body["csv"] = csv_path.as_ref().map_or(json!(null), |p| json!(p.display().to_string()));
            if let (Some(table), Some(path)) = (&csv, &csv_path) {
                write(path, &table.to_csv())?;
            }
            let text = output::to_json(&body);
            match &cfg.out {
                Some(path) => write(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Report::Text { body, summary } => match &cfg.out {
            Some(path) => {
                write(path, &body)?;
                let mut summary = summary;
                summary["path"] = json!(path.display().to_string());
                print!("{}", output::to_json(&summary));
                Ok(())
            }
            None => {
                print!("{body}");
                Ok(())
            }
        },
    }
}

fn error_kind(e: &robinspec::Error) -> &'static str {
    use robinspec::Error::*;
    match e {
        Argument(_) => "argument",
        Geometry(_) => "geometry",
        UnsupportedDomain(_) => "unsupported_domain",
        DegenerateElement { .. } => "degenerate_element",
        Matrix(_) => "matrix",
        Convergence { .. } => "convergence",
        Range { .. } => "range",
        Resolution(_) => "resolution",
        Format { .. } => "format",
        Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let command = cli.command;
    let cfg = match RunConfig::resolve(command, cli.flags) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{}", json!({ "error": "config", "command": command.name(), "message": msg }));
            return ExitCode::from(2);
        }
    };
    let report = match commands::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": "solver", "kind": error_kind(&e), "command": command.name(), "message": e.to_string() })
            );
            return ExitCode::from(3);
        }
    };
    match emit(&cfg, report) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("{}", json!({ "error": "io", "command": command.name(), "message": msg }));
            ExitCode::from(1)
        }
    }
}
