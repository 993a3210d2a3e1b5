//! Command-line front end: dataset ingestion, synthetic generators,
//! samplers and baselines, parsimony reports and plot data.
//!
//! Exit status is 0 on success, 2 for bad input data, 3 for a bad flag and
//! 4 for an I/O failure; any failure is reported as one line on stderr.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod data;
pub mod error;
pub mod synth;

pub use args::Cli;
pub use error::CliError;

/// Parses arguments, runs the command and returns the exit status.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: bad flag: {}", first.trim_start_matches("error: "));
            return 3;
        }
    };
    match commands::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
