mod args;
mod cache;
mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;
use umbilic_core::par::Execution;
use umbilic_core::Error;

use args::{Cli, Format};
use cache::Cache;
use report::{Report, CONVENTIONS};

fn build_report(cli: &Cli) -> Result<Report, Error> {
    let inputs = commands::collect_inputs(&cli.command, &cli.common)?;
    let config = json!({ "command": cli.command, "options": cli.common });
    let name = cli.command.name();
    let cache = cli.common.cache.as_deref().map(Cache::open).transpose()?;
    let key = Cache::key(name, &config, &inputs);
    if let Some(hit) = cache.as_ref().and_then(|c| c.load(&key)) {
        return Ok(hit);
    }
    let out = commands::run(&cli.command, &cli.common, Execution::default())?;
    let report = Report {
        tool: "umbilic".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name.into(),
        inputs,
        config,
        pass: out.checks.iter().all(|c| c.pass),
        checks: out.checks,
        summary: out.summary,
        notes: out.notes,
        conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
        details: out.details,
    };
    if let Some(c) = &cache {
        c.store(&key, &report)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let report = match build_report(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("umbilic {}: {e}", cli.command.name());
            return ExitCode::from(if e.is_numerical() { 3 } else { 2 });
        }
    };
    if let Some(path) = &cli.common.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("umbilic: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match cli.common.format {
        Format::Structured => print!("{}", report.to_json()),
        Format::Text => {
            print!("{}", report.to_text());
            println!("  wall time: {:.3} s", start.elapsed().as_secs_f64());
        }
    }
    ExitCode::from(if report.pass { 0 } else { 1 })
}
