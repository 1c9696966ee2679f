//! `adversim`: simulate, explore, and verify synchronous dynamic networks
//! under message adversaries.
//!
//! Exit codes: 0 ok, 2 property violated, 3 budget exhausted, 64 usage,
//! 65 unsupported request, 74 I/O failure.

mod cmd;
mod config;
mod error;
mod registry;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use cmd::{complex, enumerate, exhaustive, oracle, simulate, verify};
use config::Verbosity;

#[derive(Debug, Parser)]
#[command(name = "adversim", version, about = "Message-adversary simulator and checker")]
struct Cli {
    /// Suppress summaries on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// More detail on stderr.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one seeded execution and write its trace.
    Simulate(simulate::SimulateArgs),
    /// Check a property on every execution of the adversary tree.
    Exhaustive(exhaustive::ExhaustiveArgs),
    /// Build the TP-pairs protocol complex and export it.
    Complex(complex::ComplexArgs),
    /// Check trace, register outcome, or complex files.
    Verify(verify::VerifyArgs),
    /// Run a brute-force oracle.
    Oracle {
        /// tournament-facts, king-liveness, reachability.
        name: oracle::OracleName,
        #[command(flatten)]
        args: oracle::OracleArgs,
    },
    /// List the RCGs an adversary allows in one round.
    Enumerate(enumerate::EnumerateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let verbosity = Verbosity::from_flags(cli.quiet, cli.verbose);
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a, verbosity),
        Command::Exhaustive(a) => exhaustive::run(a, verbosity),
        Command::Complex(a) => complex::run(a, verbosity),
        Command::Verify(a) => verify::run(a),
        Command::Oracle { name, args } => oracle::run(name, &args),
        Command::Enumerate(a) => enumerate::run(a, verbosity),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adversim: {e}");
            ExitCode::from(e.code())
        }
    }
}
