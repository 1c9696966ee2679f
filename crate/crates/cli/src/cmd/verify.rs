use std::path::{Path, PathBuf};

use adversim_core::complex::{self, SimComplex};
use adversim_core::engine::{self, ExecutionTrace, Protocol, TraceRecord, TRACE_SCHEMA_VERSION};
use adversim_core::protocols::register::{first_history_violation, RegisterSimOutcome};
use adversim_core::{AdversarySpec, Digest, Rcg};
use clap::Args;

use super::oracle::{self, OracleArgs, OracleName};
use crate::error::{CliError, CliResult};
use crate::registry::{self, ProtocolVisitor, Verdict};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Trace, register outcome, or complex JSON files.
    pub files: Vec<PathBuf>,
    /// Run an oracle instead (tournament-facts, king-liveness, reachability).
    #[arg(long)]
    pub oracle: Option<OracleName>,
    #[command(flatten)]
    pub oracle_args: OracleArgs,
}

/// One invariant's result.
struct Check {
    name: &'static str,
    status: Status,
}

enum Status {
    Pass,
    Skip(String),
    Fail { round: Option<usize>, why: String },
}

impl Check {
    fn pass(name: &'static str) -> Self {
        Check { name, status: Status::Pass }
    }

    fn skip(name: &'static str, why: impl Into<String>) -> Self {
        Check {
            name,
            status: Status::Skip(why.into()),
        }
    }

    fn fail(name: &'static str, round: Option<usize>, why: impl Into<String>) -> Self {
        Check {
            name,
            status: Status::Fail {
                round,
                why: why.into(),
            },
        }
    }

    fn from_bool(name: &'static str, ok: bool, why: &str) -> Self {
        if ok {
            Check::pass(name)
        } else {
            Check::fail(name, None, why)
        }
    }

    fn print(&self) {
        match &self.status {
            Status::Pass => println!("PASS {}", self.name),
            Status::Skip(why) => println!("SKIP {} ({why})", self.name),
            Status::Fail { round: Some(r), why } => {
                println!("FAIL {} (first violating round {r}): {why}", self.name)
            }
            Status::Fail { round: None, why } => println!("FAIL {}: {why}", self.name),
        }
    }
}

struct Replay<'a> {
    spec: &'a AdversarySpec,
    record: &'a TraceRecord,
}

impl ProtocolVisitor for Replay<'_> {
    type Out = Vec<Check>;

    fn visit<P, C>(self, protocol: &P, check: C, _done: fn(&[P::State]) -> bool) -> Vec<Check>
    where
        P: Protocol + Sync,
        P::State: Send + Sync,
        P::Output: Send,
        C: Fn(&ExecutionTrace<P>) -> Verdict + Sync,
    {
        let rec = self.record;
        let rcgs: Vec<Rcg> = rec.rounds.iter().map(|r| r.rcg.clone()).collect();
        let trace = match engine::run_scripted(protocol, self.spec, &rcgs, &rec.inputs) {
            Ok(t) => t,
            Err(e) => return vec![Check::fail("replay", None, e.to_string())],
        };
        let replayed = trace.to_record(rec.protocol.as_deref(), false);
        let digests = |r: &TraceRecord| -> Vec<Vec<Digest>> {
            std::iter::once(r.initial_digests.clone())
                .chain(r.rounds.iter().map(|x| x.digests.clone()))
                .collect()
        };
        let mut checks = Vec::new();
        match digests(rec).iter().zip(digests(&replayed)).position(|(a, b)| *a != b) {
            None if rec.outputs == replayed.outputs => checks.push(Check::pass("replay")),
            None => checks.push(Check::fail("replay", None, "outputs differ from the replay")),
            Some(r) => checks.push(Check::fail("replay", Some(r), "state digests differ from the replay")),
        }
        checks.push(match check(&trace) {
            None => Check::skip("guarantee", format!("no guarantee applies under {}", self.spec)),
            Some(Ok(())) => Check::pass("guarantee"),
            Some(Err(why)) => Check::fail("guarantee", None, why),
        });
        checks
    }
}

fn verify_trace(rec: &TraceRecord) -> Vec<Check> {
    let mut checks = vec![Check::from_bool(
        "schema",
        rec.schema_version == TRACE_SCHEMA_VERSION && rec.n >= 1,
        "unsupported schema version",
    )];
    let spec = match AdversarySpec::parse(rec.n, &rec.spec) {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::fail("rcg-legality", None, e.to_string()));
            return checks;
        }
    };
    let illegal = rec
        .rounds
        .iter()
        .enumerate()
        .find(|(r, x)| !spec.validate(*r, &x.rcg).unwrap_or(false));
    checks.push(match illegal {
        None => Check::pass("rcg-legality"),
        Some((r, x)) => Check::fail("rcg-legality", Some(r + 1), format!("{:?} not allowed by {spec}", x.rcg)),
    });
    checks.push(Check::from_bool(
        "shape",
        rec.initial_digests.len() == rec.n
            && rec.outputs.len() == rec.n
            && rec.rounds.iter().all(|r| r.digests.len() == rec.n && r.rcg.n() == rec.n),
        "per-processor lists have the wrong length",
    ));

    let Some(protocol) = rec.protocol.as_deref() else {
        checks.push(Check::skip("replay", "no protocol recorded"));
        return checks;
    };
    if rec.inputs.len() != rec.n {
        checks.push(Check::skip("replay", "no inputs recorded"));
        return checks;
    }
    let (name, param) = match registry::parse_recorded(protocol) {
        Ok(x) => x,
        Err(e) => {
            checks.push(Check::fail("replay", None, e.to_string()));
            return checks;
        }
    };
    let writes = match name {
        registry::ProtocolName::Register => param.and_then(|p| p.parse().ok()).unwrap_or(1),
        _ => 1,
    };
    let schedule = match registry::pair_schedule(&spec, param.filter(|_| name == registry::ProtocolName::PairsProject)) {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::fail("replay", None, e.to_string()));
            return checks;
        }
    };
    if let Some(v) = &rec.violation {
        checks.push(Check::fail("recorded-violation", None, v.clone()));
    }
    checks.extend(registry::with_protocol(
        name,
        rec.n,
        writes,
        &schedule,
        Replay { spec: &spec, record: rec },
    ));
    checks
}

fn verify_outcome(o: &RegisterSimOutcome) -> Vec<Check> {
    let histories = match first_history_violation(o) {
        None => Check::pass("swsr-histories"),
        Some((w, r, round)) => Check::fail(
            "swsr-histories",
            Some(round),
            format!("reader {r} saw an illegal value of writer {w}"),
        ),
    };
    let alternation = o.processors.iter().enumerate().find_map(|(p, h)| {
        let completions: Vec<usize> = h.writes.iter().filter_map(|w| w.completed_round).collect();
        let reads: Vec<usize> = h.reads.iter().map(|r| r.round).collect();
        (completions != reads).then_some(p)
    });
    vec![
        histories,
        match alternation {
            None => Check::pass("write-read-alternation"),
            Some(p) => Check::fail(
                "write-read-alternation",
                None,
                format!("processor {p} has reads not paired with write completions"),
            ),
        },
        Check::from_bool("all-done", o.all_done, "some processor never finished"),
    ]
}

fn verify_complex(c: &SimComplex) -> Vec<Check> {
    vec![
        Check::from_bool("chromatic", complex::check_chromatic(c), "a top simplex repeats a color"),
        Check::from_bool("sperner", complex::check_sperner(c), "a color lies outside its carrier"),
        Check::from_bool("carriers", complex::check_carriers(c), "a carrier differs from its position's support"),
        Check::from_bool(
            "growth",
            c.tops.len() as u128 == 3u128.pow(c.k as u32),
            "top simplex count is not 3^k",
        ),
    ]
}

fn verify_file(path: &Path) -> CliResult<Vec<Check>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
    if value.get("schema_version").is_some() {
        Ok(verify_trace(&serde_json::from_value(value).map_err(bad)?))
    } else if value.get("processors").is_some() {
        Ok(verify_outcome(&serde_json::from_value(value).map_err(bad)?))
    } else if value.get("tops").is_some() {
        let c = SimComplex::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(verify_complex(&c))
    } else {
        Err(CliError::Usage(format!(
            "{}: not a trace, register outcome, or complex",
            path.display()
        )))
    }
}

pub fn run(args: VerifyArgs) -> CliResult {
    if let Some(name) = args.oracle {
        return oracle::run(name, &args.oracle_args);
    }
    if args.files.is_empty() {
        return Err(CliError::Usage("verify needs at least one file or --oracle".into()));
    }
    let mut failed = 0;
    for path in &args.files {
        if args.files.len() > 1 {
            println!("# {}", path.display());
        }
        for c in verify_file(path)? {
            c.print();
            failed += matches!(c.status, Status::Fail { .. }) as usize;
        }
    }
    if failed > 0 {
        Err(CliError::Violation(format!("{failed} invariant(s) failed")))
    } else {
        Ok(())
    }
}
