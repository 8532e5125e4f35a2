//! Command-line front end for `vqspec-core`: argument parsing, input
//! loading, run orchestration and artifact output.

pub mod args;
pub mod commands;
pub mod eigenstate;
pub mod error;
pub mod inputs;
pub mod report;
pub mod verify;

pub use args::{Cli, Command};
pub use error::{exit, CliError, CliResult};

/// Runs one parsed invocation and returns the process exit code. Errors are
/// printed to stderr.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Diag(a) => commands::diag(a),
        Command::Gen3sat(a) => commands::gen3sat(a),
        Command::Verify(a) => commands::verify(a),
        Command::Compare(a) => commands::compare(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
