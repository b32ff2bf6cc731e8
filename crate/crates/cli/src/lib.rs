//! Command-line front end for `imprior-core`: argument parsing, input
//! files and result emission.

// `!(x > 0.0)` style checks deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod io;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;
pub use error::CliError;
pub use io::{builtin_survival_data, load_logit_problem, load_trial_tables, TrialTableRecord};
pub use output::{Envelope, Format};

/// Caps the worker pool when `IMPRIOR_THREADS` is set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("IMPRIOR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "IMPRIOR_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    // a pool that already exists (e.g. a second call in one process) is kept
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args`, runs the command and writes its envelope to `out`.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = configure_threads()
        .and_then(|()| cli.command.run(cli.seed))
        .and_then(|env| output::emit(&env, cli.format, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
