//! Command-line front end.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::Status;

/// The clap command tree, for help rendering.
pub fn command() -> clap::Command {
    Cli::command()
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("VARLAG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow::anyhow!("VARLAG_THREADS must be a positive integer, got {v:?}"))?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Catalog(a) => commands::catalog_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::Residual(a) => commands::residual_cmd(a),
        Command::Classify(a) => commands::classify_cmd(a),
        Command::Invariance(a) => commands::invariance_cmd(a),
        Command::Build(a) => commands::build_cmd(a),
        Command::Solve(a) => commands::solve_cmd(a),
    });
    match result {
        Ok(Status::Ok) => 0,
        Ok(Status::PropertyFails) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
