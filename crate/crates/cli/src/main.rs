//! `coordmech`: generate scheduling-game instances, run better-response
//! dynamics, enumerate equilibria and check the family constructions.
//!
//! Every command writes JSON lines (or CSV with `--csv`) whose first record
//! echoes the run configuration. Exit codes: 0 success, 2 a checked claim
//! failed, 3 a budget or step limit was hit, 4 bad input.

mod analyze;
mod dynamics;
mod error;
mod gen;
mod output;
mod reproduce;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coordmech::io::instance_from_json;
use coordmech::Instance;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "coordmech",
    version,
    about = "Scheduling games under coordination mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a family or random instance (plus a `.cert.json` sidecar for families).
    Gen(gen::GenArgs),
    /// Run better-response dynamics and print the trace.
    Dynamics(dynamics::DynamicsArgs),
    /// Enumerate all profiles: NE, strong NE, OPT, PoA and SPoA.
    Analyze(analyze::AnalyzeArgs),
    /// Rebuild a family construction and check its claims.
    Reproduce(reproduce::ReproduceArgs),
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(instance_from_json(&text)?)
}

pub fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn run(cli: Cli, out: &mut impl Write) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen(args) => gen::run(args, out),
        Command::Dynamics(args) => dynamics::run(args, out),
        Command::Analyze(args) => analyze::run(args, out),
        Command::Reproduce(args) => reproduce::run(args, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|code| {
        out.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = out.flush();
            eprintln!("{}", err.record());
            err.exit_code()
        }
    }
}
