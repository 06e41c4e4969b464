//! The `pinlab` command-line front end.
//!
//! Every subcommand produces one or more named tables, written as CSV (a
//! `#`-prefixed JSON manifest line, then `# table: NAME` blocks) or as a
//! JSON document with `meta` and `data` keys. Exit status is 0 on success,
//! 2 on usage or domain errors and 3 when a size guard refuses the request.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::error::Error;
pub use commands::{execute, Command};
pub use output::{data_section, manifest_of, render, Cell, Format, RunManifest, Table};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "PINLAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pinlab", version, about = "Numerical laboratory for the homogeneous pinning polymer model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Random seed (default: $PINLAB_SEED, else 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Runs with `PINLAB_SEED` taken from the process environment.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(argv, std::env::var(SEED_ENV).ok(), out, err)
}

/// Runs with an explicit value for the seed environment variable.
pub fn run_with_env<I, T>(argv: I, env_seed: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let seed = match (cli.seed, env_seed) {
        (Some(s), _) => s,
        (None, Some(v)) => match v.trim().parse() {
            Ok(s) => s,
            Err(_) => {
                let _ = writeln!(err, "error: {SEED_ENV}={v:?} is not an unsigned integer");
                return EXIT_USAGE;
            }
        },
        (None, None) => 0,
    };
    let tables = match execute(&cli.command, seed) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let manifest = RunManifest::new(cli.command.name(), cli.command.params(), seed);
    let doc = render(manifest, &tables, cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, doc.as_bytes()),
        None => out.write_all(doc.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_FAILURE
        }
    }
}

/// Maps a library error onto the exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Guard { .. } | Error::Truncation { .. } => EXIT_GUARD,
        Error::Domain { .. } | Error::NotAnchored(_) | Error::InvalidPath(_) | Error::NonMarkovian => EXIT_USAGE,
        Error::Invariant(_) => EXIT_FAILURE,
    }
}
