//! Shared flags and their validated form.

use std::path::{Path, PathBuf};

use adversim_core::adversary::DEFAULT_ENUMERATION_BUDGET;
use adversim_core::engine::{ExhaustiveLimits, DEFAULT_BRANCH_CAP};
use adversim_core::AdversarySpec;
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Environment variable overriding the default branch cap.
pub const BUDGET_ENV: &str = "ADVERSIM_BUDGET";

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    /// Number of processors.
    #[arg(long)]
    pub n: usize,
    /// Adversary: tp, tp-complete, sc, kcc:K, tp-pairs[:SCHEDULE],
    /// tp-complete-except:A-B.
    #[arg(long, default_value = "tp-complete")]
    pub spec: String,
    /// Comma-separated initial items, one per processor (default 0..n).
    #[arg(long)]
    pub inputs: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Cap on complete executions explored (default 1e8, or $ADVERSIM_BUDGET).
    #[arg(long)]
    pub branch_cap: Option<u64>,
    /// Cap on RCGs enumerated per round.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub enumeration_budget: u64,
    /// Worker threads for exhaustive search.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

impl Verbosity {
    pub fn from_flags(quiet: bool, verbose: u8) -> Self {
        match (quiet, verbose) {
            (true, _) => Verbosity::Quiet,
            (false, 0) => Verbosity::Normal,
            _ => Verbosity::Verbose,
        }
    }
}

/// Validated settings of one invocation.
#[derive(Debug, Clone)]
pub struct Config {
    pub n: usize,
    pub spec: AdversarySpec,
    pub inputs: Vec<u64>,
    pub rounds: Option<usize>,
    pub seed: u64,
    pub protocol: Option<String>,
    pub out: Option<PathBuf>,
    pub limits: ExhaustiveLimits,
    pub verbosity: Verbosity,
}

impl Config {
    pub fn new(net: &NetworkArgs, verbosity: Verbosity) -> CliResult<Self> {
        if net.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let spec = AdversarySpec::parse(net.n, &net.spec).map_err(|e| CliError::Usage(e.to_string()))?;
        let inputs = match &net.inputs {
            None => (0..net.n as u64).collect(),
            Some(s) => {
                let items = s
                    .split(',')
                    .map(|x| x.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("--inputs: {e}")))?;
                if items.len() != net.n {
                    return Err(CliError::Usage(format!(
                        "--inputs has {} items, expected {}",
                        items.len(),
                        net.n
                    )));
                }
                items
            }
        };
        Ok(Config {
            n: net.n,
            spec,
            inputs,
            rounds: None,
            seed: 0,
            protocol: None,
            out: None,
            limits: ExhaustiveLimits::default(),
            verbosity,
        })
    }

    pub fn with_budgets(mut self, b: &BudgetArgs) -> CliResult<Self> {
        let env = std::env::var(BUDGET_ENV).ok();
        let branch_cap = match (b.branch_cap, env) {
            (Some(cap), _) => cap,
            (None, Some(v)) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{BUDGET_ENV}={v:?} is not a positive integer")))?,
            (None, None) => DEFAULT_BRANCH_CAP,
        };
        if branch_cap == 0 || b.enumeration_budget == 0 || b.jobs == 0 {
            return Err(CliError::Usage("budgets and --jobs must be positive".into()));
        }
        self.limits = ExhaustiveLimits {
            enumeration_budget: b.enumeration_budget,
            branch_cap,
            jobs: b.jobs,
        };
        Ok(self)
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if self.verbosity > Verbosity::Quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    pub fn detail(&self, msg: impl AsRef<str>) {
        if self.verbosity >= Verbosity::Verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Writes `value` as pretty JSON to `path`, or to stdout.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit_text(&text, path)
}

pub fn emit_text(text: &str, path: Option<&Path>) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
