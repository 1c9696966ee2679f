use std::path::PathBuf;

use adversim_core::engine::branch_count;
use clap::Args;
use serde_json::json;

use crate::config::{emit_json, BudgetArgs, Config, NetworkArgs, Verbosity};
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Round (1-based) whose allowed RCGs are listed.
    #[arg(long, default_value_t = 1)]
    pub round: usize,
    /// Also report the branch count of this many rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Lists the canonical enumeration of one round.
pub fn run(args: EnumerateArgs, verbosity: Verbosity) -> CliResult {
    let cfg = Config::new(&args.net, verbosity)?.with_budgets(&args.budget)?;
    if args.round == 0 {
        return Err(CliError::Usage("--round is 1-based".into()));
    }
    let budget = cfg.limits.enumeration_budget;
    let rcgs: Vec<_> = cfg
        .spec
        .enumerate(args.round - 1, budget)
        .map_err(|e| CliError::Budget(e.to_string()))?
        .collect();
    let branches = args
        .rounds
        .map(|r| branch_count(&cfg.spec, r, budget).map(|c| c.to_string()))
        .transpose()
        .map_err(|e| CliError::Budget(e.to_string()))?;
    cfg.note(format!("enumerate: {} RCGs allowed by {} in round {}", rcgs.len(), cfg.spec, args.round));
    emit_json(
        &json!({ "n": cfg.n, "spec": cfg.spec.to_string(), "round": args.round, "count": rcgs.len(), "branches": branches, "rcgs": rcgs }),
        args.out.as_deref(),
    )
}
