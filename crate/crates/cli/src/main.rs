//! `parisian`: solve, tabulate, simulate and verify the minimum probability of
//! lifetime exponential Parisian ruin.
//!
//! Exit codes: 0 ok, 1 property failure, 2 input error, 3 simulation integrity failure.

mod args;
mod commands;
mod error;
mod manifest;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    if let Err(e) = commands::run(cli.command) {
        // the verify report has already said what failed
        if !matches!(e, error::CliError::Checks(_)) {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
        }
        std::process::exit(e.exit_code());
    }
}
