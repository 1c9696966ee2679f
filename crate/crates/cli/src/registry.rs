//! Protocols selectable by name, and the guarantee each is checked against.

use std::str::FromStr;

use adversim_core::adversary::{AdversaryKind, AdversarySpec, PairSchedule};
use adversim_core::engine::{ExecutionTrace, FullInformation, Protocol};
use adversim_core::protocols::register::RegisterState;
use adversim_core::protocols::gossip::{self, Gossip, Snapshot};
use adversim_core::protocols::pairs::{self, PairFilter};
use adversim_core::protocols::register::{self, RegisterProtocol, RegisterSimOutcome};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolName {
    Snapshot,
    Gossip,
    FullInfo,
    Register,
    PairsCollect,
    PairsProject,
}

impl FromStr for ProtocolName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "snapshot" => ProtocolName::Snapshot,
            "gossip" => ProtocolName::Gossip,
            "full-info" => ProtocolName::FullInfo,
            "register" => ProtocolName::Register,
            "pairs-collect" => ProtocolName::PairsCollect,
            "pairs-project" => ProtocolName::PairsProject,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown protocol {other:?} (snapshot, gossip, full-info, register, pairs-collect, pairs-project)"
                )))
            }
        })
    }
}

impl ProtocolName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::Snapshot => "snapshot",
            ProtocolName::Gossip => "gossip",
            ProtocolName::FullInfo => "full-info",
            ProtocolName::Register => "register",
            ProtocolName::PairsCollect => "pairs-collect",
            ProtocolName::PairsProject => "pairs-project",
        }
    }

    /// Rounds run when `--rounds` is absent.
    pub fn default_rounds(self, n: usize, writes: u64, schedule_len: usize) -> usize {
        match self {
            ProtocolName::Snapshot | ProtocolName::FullInfo => n,
            ProtocolName::Gossip => gossip::emulation_rounds(n),
            ProtocolName::Register => register::default_budget(n, writes),
            ProtocolName::PairsCollect | ProtocolName::PairsProject => schedule_len,
        }
    }
}

/// A guarantee check: `None` when it does not apply to the trace's
/// adversary or length, otherwise its verdict.
pub type Verdict = Option<Result<(), String>>;

pub fn check_snapshot(t: &ExecutionTrace<Snapshot>) -> Verdict {
    (matches!(t.spec.kind(), AdversaryKind::TpComplete) && t.rounds() >= t.n)
        .then(|| gossip::check_snapshot(t).map(|_| ()).map_err(|e| e.to_string()))
}

pub fn check_gossip(t: &ExecutionTrace<Gossip>) -> Verdict {
    let traversable = matches!(
        t.spec.kind(),
        AdversaryKind::Tp | AdversaryKind::TpComplete | AdversaryKind::Sc
    );
    (traversable && t.rounds() >= gossip::emulation_rounds(t.n)).then(|| {
        gossip::check_emulation(t)
            .map(|_| ())
            .map_err(|e| e.to_string())
            .and_then(|()| {
                gossip::check_gossip_progress(t).map_err(|(r, m)| format!("round {r}: {m}"))
            })
    })
}

pub fn check_full_info(t: &ExecutionTrace<FullInformation>) -> Verdict {
    Some(
        match t.final_states().iter().position(|v| !v.is_consistent()) {
            None => Ok(()),
            Some(p) => Err(format!("view of processor {p} is inconsistent")),
        },
    )
}

pub fn check_register(t: &ExecutionTrace<RegisterProtocol>, writes: u64) -> Verdict {
    matches!(t.spec.kind(), AdversaryKind::TpComplete).then(|| {
        register::certify_king_soundness(t).map_err(|e| e.to_string())?;
        let o = RegisterSimOutcome::from_trace(t, writes, t.rounds(), 0);
        match register::first_history_violation(&o) {
            None => Ok(()),
            Some((w, r, round)) => Err(format!(
                "round {round}: reader {r} saw an illegal value of writer {w}"
            )),
        }
    })
}

pub fn check_pairs_collect(t: &ExecutionTrace<PairFilter>) -> Verdict {
    matches!(t.spec.kind(), AdversaryKind::TpPairs(_))
        .then(|| pairs::check_collection(t).map(|_| ()).map_err(|e| e.to_string()))
}

pub fn check_pairs_project(t: &ExecutionTrace<PairFilter>, schedule: &PairSchedule) -> Verdict {
    matches!(t.spec.kind(), AdversaryKind::TpComplete).then(|| {
        pairs::check_projection(t, schedule)
            .map(|_| ())
            .map_err(|e| e.to_string())
    })
}

/// Schedule for the pair protocols: the adversary's own for TP-pairs,
/// otherwise `explicit` or round-robin.
pub fn pair_schedule(spec: &AdversarySpec, explicit: Option<&str>) -> Result<PairSchedule, CliError> {
    let parsed = match (spec.kind(), explicit) {
        (_, Some(s)) => PairSchedule::parse(spec.n(), s),
        (AdversaryKind::TpPairs(s), None) => Ok(s.clone()),
        (_, None) => PairSchedule::round_robin(spec.n()),
    };
    parsed.map_err(|e| CliError::Usage(e.to_string()))
}

/// Name recorded in traces: parameters that replay needs ride after a
/// colon, as in `register:3` or `pairs-project:0-1,1-2,0-2`.
pub fn recorded_name(name: ProtocolName, writes: u64, schedule: &PairSchedule) -> String {
    match name {
        ProtocolName::Register => format!("register:{writes}"),
        ProtocolName::PairsProject => format!("pairs-project:{schedule}"),
        other => other.as_str().to_owned(),
    }
}

/// Inverse of [`recorded_name`].
pub fn parse_recorded(s: &str) -> Result<(ProtocolName, Option<&str>), CliError> {
    let (head, param) = match s.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (s, None),
    };
    Ok((head.parse()?, param))
}

/// What to do with a protocol once its concrete type is known.
pub trait ProtocolVisitor {
    type Out;

    /// `check` is the protocol's guarantee; `done` says when a run may stop
    /// early.
    fn visit<P, C>(self, protocol: &P, check: C, done: fn(&[P::State]) -> bool) -> Self::Out
    where
        P: Protocol + Sync,
        P::State: Send + Sync,
        P::Output: Send,
        C: Fn(&ExecutionTrace<P>) -> Verdict + Sync;
}

fn never<S>(_: &[S]) -> bool {
    false
}

fn all_done(states: &[RegisterState]) -> bool {
    states.iter().all(RegisterState::is_done)
}

/// Instantiates `name` and hands it to `visitor`.
pub fn with_protocol<V: ProtocolVisitor>(
    name: ProtocolName,
    n: usize,
    writes: u64,
    schedule: &PairSchedule,
    visitor: V,
) -> V::Out {
    match name {
        ProtocolName::Snapshot => visitor.visit(&Snapshot, check_snapshot, never),
        ProtocolName::Gossip => visitor.visit(&Gossip, check_gossip, never),
        ProtocolName::FullInfo => visitor.visit(&FullInformation::default(), check_full_info, never),
        ProtocolName::Register => visitor.visit(
            &RegisterProtocol::new(n, writes),
            move |t: &ExecutionTrace<RegisterProtocol>| check_register(t, writes),
            all_done,
        ),
        ProtocolName::PairsCollect => visitor.visit(
            &PairFilter {
                schedule: schedule.clone(),
            },
            check_pairs_collect,
            never,
        ),
        ProtocolName::PairsProject => visitor.visit(
            &PairFilter {
                schedule: schedule.clone(),
            },
            |t: &ExecutionTrace<PairFilter>| check_pairs_project(t, schedule),
            never,
        ),
    }
}
