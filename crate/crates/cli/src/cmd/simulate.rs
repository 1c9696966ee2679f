use std::path::PathBuf;

use adversim_core::engine::{self, ExecutionTrace, Protocol};
use adversim_core::protocols::register::{RegisterProtocol, RegisterSimOutcome};
use clap::Args;

use crate::config::{emit_json, Config, NetworkArgs, Verbosity};
use crate::error::{CliError, CliResult};
use crate::registry::{self, ProtocolName, ProtocolVisitor, Verdict};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// snapshot, gossip, full-info, register, pairs-collect, pairs-project.
    #[arg(long, default_value = "full-info")]
    pub protocol: String,
    /// Rounds to run (register: round budget). Defaults per protocol.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write/read iterations per processor for `register`.
    #[arg(long, default_value_t = 1)]
    pub writes: u64,
    /// Pair schedule for the pair protocols, e.g. `0-1,1-2,0-2`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Trace file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Register outcome file, `register` only.
    #[arg(long)]
    pub outcome: Option<PathBuf>,
    /// Include full per-round states in the trace.
    #[arg(long)]
    pub dump_states: bool,
}

struct Simulate<'a> {
    cfg: &'a Config,
    name: String,
    rounds: usize,
    dump_states: bool,
}

impl ProtocolVisitor for Simulate<'_> {
    type Out = CliResult<Verdict>;

    fn visit<P, C>(self, protocol: &P, check: C, done: fn(&[P::State]) -> bool) -> CliResult<Verdict>
    where
        P: Protocol + Sync,
        P::State: Send + Sync,
        P::Output: Send,
        C: Fn(&ExecutionTrace<P>) -> Verdict + Sync,
    {
        let cfg = self.cfg;
        let trace = engine::run_until(protocol, &cfg.spec, self.rounds, &cfg.inputs, cfg.seed, done)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for (r, rcg) in trace.rcgs.iter().enumerate() {
            cfg.detail(format!("round {}: {:?}", r + 1, rcg.edges().collect::<Vec<_>>()));
        }
        let verdict = check(&trace);
        let mut record = trace.to_record(Some(&self.name), self.dump_states);
        record.inputs = cfg.inputs.clone();
        if let Some(Err(m)) = &verdict {
            record.violation = Some(m.clone());
        }
        emit_json(&record, cfg.out.as_deref())?;
        let returned = trace.outputs.iter().filter(|o| o.is_some()).count();
        cfg.note(format!(
            "simulate: {} under {} for {} rounds (seed {}): {returned}/{} outputs, guarantee {}",
            self.name,
            cfg.spec,
            trace.rounds(),
            cfg.seed,
            cfg.n,
            match &verdict {
                None => "not applicable".to_owned(),
                Some(Ok(())) => "holds".to_owned(),
                Some(Err(m)) => format!("violated: {m}"),
            }
        ));
        Ok(verdict)
    }
}

pub fn run(args: SimulateArgs, verbosity: Verbosity) -> CliResult {
    let mut cfg = Config::new(&args.net, verbosity)?;
    let name: ProtocolName = args.protocol.parse()?;
    if args.writes == 0 {
        return Err(CliError::Usage("--writes must be at least 1".into()));
    }
    if args.outcome.is_some() && name != ProtocolName::Register {
        return Err(CliError::Usage("--outcome applies to --protocol register only".into()));
    }
    let schedule = registry::pair_schedule(&cfg.spec, args.schedule.as_deref())?;
    let rounds = args
        .rounds
        .unwrap_or_else(|| name.default_rounds(cfg.n, args.writes, schedule.len()));
    cfg.rounds = Some(rounds);
    cfg.seed = args.seed;
    cfg.protocol = Some(name.as_str().to_owned());
    cfg.out = args.out.clone();

    let visitor = Simulate {
        cfg: &cfg,
        name: registry::recorded_name(name, args.writes, &schedule),
        rounds,
        dump_states: args.dump_states,
    };
    let verdict = registry::with_protocol(name, cfg.n, args.writes, &schedule, visitor)?;
    if let Some(Err(m)) = verdict {
        return Err(CliError::Violation(m));
    }
    if name == ProtocolName::Register {
        return register_outcome(&cfg, args.writes, rounds, args.outcome.as_deref());
    }
    Ok(())
}

/// Reruns the (deterministic) register simulation to write its outcome
/// and report an exhausted budget.
fn register_outcome(cfg: &Config, writes: u64, budget: usize, path: Option<&std::path::Path>) -> CliResult {
    let p = RegisterProtocol::new(cfg.n, writes);
    let trace = engine::run_until(&p, &cfg.spec, budget, &cfg.inputs, cfg.seed, |s| {
        s.iter().all(|x| x.is_done())
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = RegisterSimOutcome::from_trace(&trace, writes, budget, cfg.seed);
    if let Some(path) = path {
        emit_json(&outcome, Some(path))?;
    }
    if !outcome.all_done {
        return Err(CliError::Budget(format!(
            "not every processor finished within {budget} rounds"
        )));
    }
    Ok(())
}
