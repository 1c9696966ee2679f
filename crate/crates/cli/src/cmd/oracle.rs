use std::path::PathBuf;
use std::str::FromStr;

use adversim_core::graph::{has_traversal_path, Rcg};
use adversim_core::oracle;
use clap::Args;
use serde_json::json;

use crate::config::emit_json;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleName {
    TournamentFacts,
    KingLiveness,
    Reachability,
}

impl FromStr for OracleName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tournament-facts" => Ok(OracleName::TournamentFacts),
            "king-liveness" => Ok(OracleName::KingLiveness),
            "reachability" => Ok(OracleName::Reachability),
            other => Err(format!(
                "unknown oracle {other:?} (tournament-facts, king-liveness, reachability)"
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Processor count.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Deepest execution length searched by king-liveness.
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Edges for reachability, e.g. `0-1,2-1`.
    #[arg(long)]
    pub edges: Option<String>,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_edges(n: usize, s: &str) -> CliResult<Rcg> {
    let edges = s
        .split(',')
        .filter(|e| !e.trim().is_empty())
        .map(|e| {
            let (a, b) = e
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("edge {e:?} is not A-B")))?;
            let parse = |x: &str| x.parse::<usize>().map_err(|err| CliError::Usage(format!("edge {e:?}: {err}")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Rcg::from_edges(n, edges).map_err(|e| CliError::Usage(e.to_string()))
}

fn guard(e: oracle::OracleError) -> CliError {
    CliError::Budget(e.to_string())
}

/// Runs one oracle and writes its JSON report. Exits 2 when the report
/// refutes the fact it checks.
pub fn run(name: OracleName, args: &OracleArgs) -> CliResult {
    let out = args.out.as_deref();
    match name {
        OracleName::TournamentFacts => {
            let report = oracle::tournament_facts_oracle(args.n).map_err(guard)?;
            emit_json(&report, out)?;
            eprintln!(
                "oracle: {} tournaments on {} processors, {} failures",
                report.tournaments,
                args.n,
                report.failures.len()
            );
            if !report.all_pass() {
                return Err(CliError::Violation("tournament facts fail".into()));
            }
        }
        OracleName::KingLiveness => {
            let report = oracle::king_liveness_search(args.n, args.max_depth).map_err(guard)?;
            emit_json(&report, out)?;
            match report.l_star {
                Some(l) => eprintln!("oracle: every TP-complete execution has a king round by depth {l}"),
                None => {
                    return Err(CliError::Violation(format!(
                        "king-free executions remain at depth {}",
                        args.max_depth
                    )))
                }
            }
        }
        OracleName::Reachability => {
            let g = parse_edges(args.n, args.edges.as_deref().unwrap_or(""))?;
            let truth = oracle::reachability_pair_oracle(&g).map_err(guard)?;
            let module = has_traversal_path(&g);
            emit_json(
                &json!({ "n": args.n, "edges": g.edges().collect::<Vec<_>>(), "traversal_path": truth, "agrees": truth == module }),
                out,
            )?;
            if truth != module {
                return Err(CliError::Violation("has_traversal_path disagrees with the oracle".into()));
            }
        }
    }
    Ok(())
}
