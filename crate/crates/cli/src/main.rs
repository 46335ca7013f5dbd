//! `greduce`: PageRank, reduced Google matrix and friends/followers graphs
//! from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 parse, 4 convergence, 5 consistency
//! (including failed oracle checks), 6 validation, 7 I/O, 8 config.

mod commands;
mod config;
mod oracle_cmd;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greduce::{Error, Mode, SourceMatrix};

use crate::config::{ConfigError, Overrides, RunConfig};
use crate::oracle_cmd::ChecksFailed;

#[derive(Parser)]
#[command(
    name = "greduce",
    version,
    about = "Reduced Google matrix analysis of directed networks"
)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Global PageRank and CheiRank, plus local (K, K*) indices for a subset.
    Rank(Overrides),
    /// Reduced Google matrix of the subset and its components.
    Reduce(Overrides),
    /// Top-k friends or followers graph grown from seed members.
    Friends {
        #[command(flatten)]
        overrides: Overrides,
        /// Matrix to read: gr, gqrnd or grr.
        #[arg(long, default_value = "gr")]
        source: SourceMatrix,
        /// friends (columns) or followers (rows).
        #[arg(long, default_value = "friends")]
        mode: Mode,
    },
    /// Check the sparse pipeline against dense brute force.
    Oracle {
        #[command(flatten)]
        overrides: Overrides,
        /// Previously written gr.csv to compare with the dense result.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parse { .. } | Error::UnknownLabel(_) | Error::EmptyInput(_) => 3,
                Error::NotConverged { .. }
                | Error::Singular(_)
                | Error::Degenerate { .. }
                | Error::SingularSystem { .. } => 4,
                Error::Consistency(_) => 5,
                Error::DimensionMismatch { .. }
                | Error::NonFinite(_)
                | Error::InvalidSubset(_)
                | Error::InvalidParameter(_)
                | Error::CapExceeded { .. } => 6,
            };
        }
        if cause.is::<ChecksFailed>() {
            return 5;
        }
        if cause.is::<ConfigError>() {
            return 8;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if e.is_io_error() { 7 } else { 3 };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 7;
        }
    }
    1
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Rank(o) => commands::cmd_rank(&RunConfig::resolve(o)?),
        Command::Reduce(o) => commands::cmd_reduce(&RunConfig::resolve(o)?),
        Command::Friends {
            overrides,
            source,
            mode,
        } => commands::cmd_friends(&RunConfig::resolve(overrides)?, source, mode),
        Command::Oracle {
            overrides,
            reference,
        } => oracle_cmd::cmd_oracle(&RunConfig::resolve(overrides)?, reference.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
