use std::path::PathBuf;
use std::str::FromStr;

use adversim_core::adversary::AdversaryError;
use adversim_core::engine::{self, EngineError, ExecutionTrace, Protocol, TraceRecord, Verdict as EngineVerdict};
use adversim_core::protocols::register::RegisterProtocol;
use clap::Args;
use serde::Serialize;

use crate::config::{emit_json, BudgetArgs, Config, NetworkArgs, Verbosity};
use crate::error::{CliError, CliResult};
use crate::registry::{self, ProtocolName, ProtocolVisitor, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    SnapshotValid,
    TournamentEmulation,
    KingLiveness,
    PairsTranslation,
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "snapshot-valid" => Property::SnapshotValid,
            "tournament-emulation" => Property::TournamentEmulation,
            "king-liveness" => Property::KingLiveness,
            "pairs-translation" => Property::PairsTranslation,
            other => {
                return Err(format!(
                    "unknown property {other:?} (snapshot-valid, tournament-emulation, king-liveness, pairs-translation)"
                ))
            }
        })
    }
}

impl Property {
    fn as_str(self) -> &'static str {
        match self {
            Property::SnapshotValid => "snapshot-valid",
            Property::TournamentEmulation => "tournament-emulation",
            Property::KingLiveness => "king-liveness",
            Property::PairsTranslation => "pairs-translation",
        }
    }
}

#[derive(Debug, Args)]
pub struct ExhaustiveArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Execution length (tree depth).
    #[arg(long)]
    pub rounds: usize,
    /// snapshot-valid, tournament-emulation, king-liveness, pairs-translation.
    #[arg(long)]
    pub property: Property,
    /// Write/read iterations per processor for king-liveness.
    #[arg(long, default_value_t = 1)]
    pub writes: u64,
    /// Pair schedule for pairs-translation under tp-complete.
    #[arg(long)]
    pub schedule: Option<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Seeded runs used when the tree exceeds the budget.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// First seed of the sampling fallback.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exit 3 instead of sampling when the tree exceeds the budget.
    #[arg(long)]
    pub no_fallback: bool,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Counterexample trace file; embedded in the report when absent.
    #[arg(long)]
    pub counterexample: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    property: &'static str,
    protocol: String,
    n: usize,
    spec: String,
    rounds: usize,
    /// `exhaustive` or `sampled`.
    mode: &'static str,
    executions: u64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fallback_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<TraceRecord>,
}

struct Explore<'a> {
    cfg: &'a Config,
    args: &'a ExhaustiveArgs,
    name: String,
}

fn is_budget(e: &EngineError) -> bool {
    matches!(
        e,
        EngineError::BranchCapExceeded { .. } | EngineError::Adversary(AdversaryError::BudgetExceeded { .. })
    )
}

impl ProtocolVisitor for Explore<'_> {
    type Out = CliResult<Report>;

    fn visit<P, C>(self, protocol: &P, check: C, _done: fn(&[P::State]) -> bool) -> CliResult<Report>
    where
        P: Protocol + Sync,
        P::State: Send + Sync,
        P::Output: Send,
        C: Fn(&ExecutionTrace<P>) -> Verdict + Sync,
    {
        let (cfg, args) = (self.cfg, self.args);
        let failure = |t: &ExecutionTrace<P>| -> Option<String> {
            match check(t) {
                Some(Err(m)) => Some(m),
                _ => None,
            }
        };
        let mut report = Report {
            property: args.property.as_str(),
            protocol: self.name.clone(),
            n: cfg.n,
            spec: cfg.spec.to_string(),
            rounds: args.rounds,
            mode: "exhaustive",
            executions: 0,
            holds: true,
            fallback_reason: None,
            counterexample: None,
        };
        let record = |t: &ExecutionTrace<P>, why: String| {
            let mut r = t.to_record(Some(&self.name), false);
            r.inputs = cfg.inputs.clone();
            r.violation = Some(why);
            r
        };
        match engine::run_exhaustive(protocol, &cfg.spec, args.rounds, &cfg.inputs, &cfg.limits, |t| {
            failure(t).is_none()
        }) {
            Ok(EngineVerdict::AllHold { executions }) => report.executions = executions,
            Ok(EngineVerdict::Counterexample { trace }) => {
                report.holds = false;
                report.counterexample = Some(record(&trace, failure(&trace).unwrap_or_default()));
            }
            Err(e) if is_budget(&e) && !args.no_fallback => {
                cfg.note(format!("exhaustive: {e}; falling back to {} seeded runs", args.samples));
                report.mode = "sampled";
                report.fallback_reason = Some(e.to_string());
                for seed in args.seed..args.seed.saturating_add(args.samples) {
                    let t = engine::run(protocol, &cfg.spec, args.rounds, &cfg.inputs, seed)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    report.executions += 1;
                    if let Some(why) = failure(&t) {
                        report.holds = false;
                        report.counterexample = Some(record(&t, why));
                        break;
                    }
                }
            }
            Err(e) if is_budget(&e) => return Err(CliError::Budget(e.to_string())),
            Err(e) => return Err(CliError::Usage(e.to_string())),
        }
        Ok(report)
    }
}

/// Some processor completes a write within the trace, on top of the
/// register guarantee.
fn king_liveness(t: &ExecutionTrace<RegisterProtocol>, writes: u64) -> Verdict {
    let fired = (1..t.states.len()).any(|r| t.states[r].iter().any(|s| s.completed_in(r).is_some()));
    if !fired {
        return Some(Err(format!("no king round within {} rounds", t.rounds())));
    }
    registry::check_register(t, writes)
}

fn protocol_for(property: Property, cfg: &Config) -> CliResult<ProtocolName> {
    use adversim_core::AdversaryKind;
    Ok(match property {
        Property::SnapshotValid => ProtocolName::Snapshot,
        Property::TournamentEmulation => ProtocolName::Gossip,
        Property::KingLiveness => ProtocolName::Register,
        Property::PairsTranslation => match cfg.spec.kind() {
            AdversaryKind::TpPairs(_) => ProtocolName::PairsCollect,
            AdversaryKind::TpComplete => ProtocolName::PairsProject,
            _ => {
                return Err(CliError::Unsupported(format!(
                    "pairs-translation needs tp-pairs or tp-complete, got {}",
                    cfg.spec
                )))
            }
        },
    })
}

pub fn run(args: ExhaustiveArgs, verbosity: Verbosity) -> CliResult {
    let mut cfg = Config::new(&args.net, verbosity)?.with_budgets(&args.budget)?;
    if args.writes == 0 || args.samples == 0 {
        return Err(CliError::Usage("--writes and --samples must be positive".into()));
    }
    let name = protocol_for(args.property, &cfg)?;
    let schedule = registry::pair_schedule(&cfg.spec, args.schedule.as_deref())?;
    cfg.rounds = Some(args.rounds);
    cfg.protocol = Some(name.as_str().to_owned());
    cfg.out = args.out.clone();
    let visitor = Explore {
        cfg: &cfg,
        args: &args,
        name: registry::recorded_name(name, args.writes, &schedule),
    };
    let mut report = if args.property == Property::KingLiveness {
        let writes = args.writes;
        visitor.visit(
            &RegisterProtocol::new(cfg.n, writes),
            move |t: &ExecutionTrace<RegisterProtocol>| king_liveness(t, writes),
            |_| false,
        )?
    } else {
        registry::with_protocol(name, cfg.n, args.writes, &schedule, visitor)?
    };
    if let (Some(path), Some(trace)) = (&args.counterexample, report.counterexample.take()) {
        emit_json(&trace, Some(path))?;
    }
    emit_json(&report, cfg.out.as_deref())?;
    cfg.note(format!(
        "exhaustive: {} over {} {} executions of {} rounds under {}: {}",
        report.property,
        report.executions,
        report.mode,
        report.rounds,
        report.spec,
        if report.holds { "holds" } else { "counterexample found" }
    ));
    if report.holds {
        Ok(())
    } else {
        Err(CliError::Violation(format!("{} fails", report.property)))
    }
}
