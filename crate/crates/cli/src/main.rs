//! `rlfem`: convergence, eigenvalue and conditioning studies from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric failure, 1 i/o error.

mod args;
mod commands;
mod suite;
mod table;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let out = &cli.out;
    if cli.seed_tables {
        let dir = out.output.as_deref().unwrap_or("tables");
        if dir == "-" {
            return Err(CliError::Usage("--seed-tables writes files; give a directory with --output".into()));
        }
        return suite::seed_tables(Path::new(dir), out.format);
    }
    let table = match &cli.command {
        Some(Command::Solve(a)) => commands::solve(a)?,
        Some(Command::Converge(a)) => commands::converge(a)?,
        Some(Command::Eigen(a)) => commands::eigen(a)?,
        Some(Command::Cond(a)) => commands::cond(a)?,
        None => return Err(CliError::Usage("a subcommand or --seed-tables is required".into())),
    };
    table::emit(&table, out.format, out.output.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rlfem: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
