//! SWSR register simulation over TP-complete.
//!
//! Every processor keeps the most advanced write it knows of each writer.
//! A write completes in the first round its owner passes the king
//! condition; the owner then reads every register and either issues its
//! next write or, after its last one, posts a done sentinel and only relays
//! from then on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::adversary::{AdversaryKind, AdversarySpec};
use crate::digest::{Digest, StateDigest};
use crate::engine::{self, ExecutionTrace, Protocol};

/// Sequence number of a done sentinel.
pub const DONE_SEQ: u64 = u64::MAX;

/// Register values: index `j` is the value for the register read by `j`,
/// `None` where nothing is written.
pub type RegisterVector = Vec<Option<u64>>;

/// Write number `seq` of `writer`, or with `seq == DONE_SEQ` the writer's
/// output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WriteTriplet {
    pub writer: usize,
    pub vector: RegisterVector,
    pub seq: u64,
}

impl WriteTriplet {
    pub fn is_done(&self) -> bool {
        self.seq == DONE_SEQ
    }
}

/// What one processor knows of everyone's writes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnowledgeVector {
    pub owner: usize,
    /// Most advanced write known per writer.
    pub latest: BTreeMap<usize, WriteTriplet>,
    /// Done sentinels known, per finished processor.
    pub done: BTreeMap<usize, WriteTriplet>,
}

impl KnowledgeVector {
    pub fn new(owner: usize, first: WriteTriplet) -> Self {
        KnowledgeVector {
            owner,
            latest: BTreeMap::from([(owner, first)]),
            done: BTreeMap::new(),
        }
    }

    /// Seq of the most advanced write of `writer` known here.
    pub fn seq_of(&self, writer: usize) -> Option<u64> {
        self.latest.get(&writer).map(|t| t.seq)
    }

    pub fn is_done(&self, p: usize) -> bool {
        self.done.contains_key(&p)
    }

    /// The owner's current write.
    pub fn own_seq(&self) -> u64 {
        self.seq_of(self.owner).expect("a knowledge vector holds its owner's write")
    }

    /// Keeps the higher-seq triplet per writer and every done sentinel.
    pub fn merge(&mut self, other: &KnowledgeVector) {
        for (&w, t) in &other.latest {
            match self.latest.get(&w) {
                Some(mine) if mine.seq >= t.seq => {}
                _ => {
                    self.latest.insert(w, t.clone());
                }
            }
        }
        for (&w, t) in &other.done {
            self.done.entry(w).or_insert_with(|| t.clone());
        }
    }

    /// Total order on the vectors one processor sends over time: own seq
    /// first (done counts as highest), then the per-writer seqs
    /// lexicographically. Extends knowledge dominance.
    pub fn advancement(&self, n: usize) -> (u64, Vec<u64>, usize) {
        let own = if self.is_done(self.owner) {
            DONE_SEQ
        } else {
            self.own_seq()
        };
        let seqs = (0..n).map(|w| self.seq_of(w).unwrap_or(0)).collect();
        (own, seqs, self.done.len())
    }
}

/// Round-local king test for `kv.owner`.
///
/// Holds iff every other processor not known to be done either sent
/// nothing this round or sent a vector that already holds the owner's
/// current write.
pub fn king_condition(kv: &KnowledgeVector, received: &BTreeMap<usize, KnowledgeVector>) -> bool {
    let me = kv.owner;
    let current = kv.own_seq();
    received.iter().all(|(&j, theirs)| {
        j == me
            || kv.is_done(j)
            || theirs.is_done(j)
            || theirs.seq_of(me).is_some_and(|s| s >= current)
    })
}

/// Values of write `seq` of `writer`: `seq` in every register except the
/// writer's own.
pub fn write_values(n: usize, writer: usize, seq: u64) -> RegisterVector {
    (0..n).map(|j| (j != writer).then_some(seq)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WriteOp {
    pub seq: u64,
    /// First round in which the write was sent.
    pub issued_round: usize,
    pub completed_round: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReadOp {
    pub round: usize,
    /// Seq read per writer, `None` for a register never written.
    pub seqs: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RegisterState {
    pub kv: KnowledgeVector,
    /// Most advanced vector received for each other processor.
    pub relayed: BTreeMap<usize, KnowledgeVector>,
    pub round: usize,
    pub writes: Vec<WriteOp>,
    pub reads: Vec<ReadOp>,
    pub output: Option<RegisterVector>,
}

impl RegisterState {
    pub fn is_done(&self) -> bool {
        self.output.is_some()
    }

    /// Seq of the write completed in `round`, if any.
    pub fn completed_in(&self, round: usize) -> Option<u64> {
        self.writes
            .iter()
            .find(|w| w.completed_round == Some(round))
            .map(|w| w.seq)
    }
}

impl StateDigest for RegisterState {
    fn state_digest(&self) -> Digest {
        Digest::of_json(self)
    }
}

/// What a processor broadcasts: its own vector and the most advanced
/// vector it holds for each other processor.
#[derive(Debug, Clone)]
pub struct RegisterMessage {
    pub own: KnowledgeVector,
    pub relayed: BTreeMap<usize, KnowledgeVector>,
}

/// Register simulation with `writes` write/read iterations per processor.
#[derive(Debug, Clone, Copy)]
pub struct RegisterProtocol {
    pub n: usize,
    pub writes: u64,
}

impl RegisterProtocol {
    pub fn new(n: usize, writes: u64) -> Self {
        assert!(writes >= 1, "at least one write per processor");
        RegisterProtocol { n, writes }
    }

    fn keep_more_advanced(&self, into: &mut BTreeMap<usize, KnowledgeVector>, kv: &KnowledgeVector) {
        match into.get(&kv.owner) {
            Some(mine) if mine.advancement(self.n) >= kv.advancement(self.n) => {}
            _ => {
                into.insert(kv.owner, kv.clone());
            }
        }
    }
}

impl Protocol for RegisterProtocol {
    type State = RegisterState;
    type Payload = RegisterMessage;
    type Output = RegisterVector;

    fn init(&self, pid: usize, _item: u64) -> RegisterState {
        let first = WriteTriplet {
            writer: pid,
            vector: write_values(self.n, pid, 1),
            seq: 1,
        };
        RegisterState {
            kv: KnowledgeVector::new(pid, first),
            relayed: BTreeMap::new(),
            round: 0,
            writes: vec![WriteOp {
                seq: 1,
                issued_round: 1,
                completed_round: None,
            }],
            reads: Vec::new(),
            output: None,
        }
    }

    fn message(&self, state: &RegisterState) -> RegisterMessage {
        RegisterMessage {
            own: state.kv.clone(),
            relayed: state.relayed.clone(),
        }
    }

    fn receive(&self, state: &RegisterState, received: BTreeMap<usize, RegisterMessage>) -> RegisterState {
        let mut next = state.clone();
        next.round += 1;
        let round = next.round;
        let me = state.kv.owner;

        let own_vectors: BTreeMap<usize, KnowledgeVector> =
            received.iter().map(|(&j, m)| (j, m.own.clone())).collect();
        let king = !state.is_done() && king_condition(&state.kv, &own_vectors);

        for m in received.values() {
            next.kv.merge(&m.own);
            self.keep_more_advanced(&mut next.relayed, &m.own);
            for kv in m.relayed.values().filter(|kv| kv.owner != me) {
                self.keep_more_advanced(&mut next.relayed, kv);
            }
        }
        if !king {
            return next;
        }

        let current = next.writes.last_mut().expect("a live processor has a pending write");
        current.completed_round = Some(round);
        let completed = current.seq;
        let seqs: Vec<Option<u64>> = (0..self.n).map(|w| next.kv.seq_of(w)).collect();
        next.reads.push(ReadOp {
            round,
            seqs: seqs.clone(),
        });
        if completed >= self.writes {
            next.kv.done.insert(
                me,
                WriteTriplet {
                    writer: me,
                    vector: seqs.clone(),
                    seq: DONE_SEQ,
                },
            );
            next.output = Some(seqs);
        } else {
            let seq = completed + 1;
            next.kv.latest.insert(
                me,
                WriteTriplet {
                    writer: me,
                    vector: write_values(self.n, me, seq),
                    seq,
                },
            );
            next.writes.push(WriteOp {
                seq,
                issued_round: round + 1,
                completed_round: None,
            });
        }
        next
    }

    fn output(&self, state: &RegisterState) -> Option<RegisterVector> {
        state.output.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorHistory {
    pub writes: Vec<WriteOp>,
    pub reads: Vec<ReadOp>,
    pub output_round: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum LinearizationEvent {
    /// Linearized at the first round some read returned it or a later
    /// write of the same writer.
    Write { round: usize, writer: usize, seq: u64 },
    /// Linearized at the round of the reader's king test.
    Read { round: usize, reader: usize },
}

impl LinearizationEvent {
    fn key(&self) -> (usize, u8, usize, u64) {
        match *self {
            LinearizationEvent::Write { round, writer, seq } => (round, 0, writer, seq),
            LinearizationEvent::Read { round, reader } => (round, 1, reader, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSimOutcome {
    pub n: usize,
    pub writes_per_processor: u64,
    pub budget: usize,
    pub seed: u64,
    pub rounds_run: usize,
    pub all_done: bool,
    pub processors: Vec<ProcessorHistory>,
    pub linearization: Vec<LinearizationEvent>,
}

impl RegisterSimOutcome {
    pub fn from_trace(trace: &ExecutionTrace<RegisterProtocol>, writes: u64, budget: usize, seed: u64) -> Self {
        let finals = trace.final_states();
        let processors: Vec<ProcessorHistory> = finals
            .iter()
            .zip(&trace.outputs)
            .map(|(s, out)| ProcessorHistory {
                writes: s.writes.clone(),
                reads: s.reads.clone(),
                output_round: out.as_ref().map(|o| o.round),
            })
            .collect();
        RegisterSimOutcome {
            n: trace.n,
            writes_per_processor: writes,
            budget,
            seed,
            rounds_run: trace.rounds(),
            all_done: finals.iter().all(RegisterState::is_done),
            linearization: linearize(&processors),
            processors,
        }
    }
}

fn linearize(processors: &[ProcessorHistory]) -> Vec<LinearizationEvent> {
    let mut events = Vec::new();
    for (writer, h) in processors.iter().enumerate() {
        for w in &h.writes {
            let first_read = processors
                .iter()
                .flat_map(|p| &p.reads)
                .filter(|r| r.seqs[writer].is_some_and(|s| s >= w.seq))
                .map(|r| r.round)
                .min();
            if let Some(round) = first_read {
                events.push(LinearizationEvent::Write {
                    round,
                    writer,
                    seq: w.seq,
                });
            }
        }
    }
    for (reader, h) in processors.iter().enumerate() {
        events.extend(h.reads.iter().map(|r| LinearizationEvent::Read {
            round: r.round,
            reader,
        }));
    }
    events.sort_by_key(LinearizationEvent::key);
    events
}

pub fn default_budget(n: usize, writes: u64) -> usize {
    64 * n * writes as usize
}

/// Seeded register simulation under TP-complete, stopping once every
/// processor is done or after `budget` rounds.
pub fn simulate_rwwf(
    n: usize,
    writes: u64,
    budget: usize,
    seed: u64,
) -> Result<(RegisterSimOutcome, ExecutionTrace<RegisterProtocol>), ProtocolError> {
    let spec = AdversarySpec::tp_complete(n)?;
    let protocol = RegisterProtocol::new(n, writes);
    let inputs = vec![0; n];
    let trace = engine::run_until(&protocol, &spec, budget, &inputs, seed, |states| {
        states.iter().all(RegisterState::is_done)
    })?;
    Ok((RegisterSimOutcome::from_trace(&trace, writes, budget, seed), trace))
}

/// Legality of every (writer, reader) register history.
///
/// For each reader's successive reads of one writer: returned seqs never
/// decrease, are never older than a write completed in an earlier round,
/// and were issued no later than the read.
pub fn validate_swsr_histories(o: &RegisterSimOutcome) -> bool {
    first_history_violation(o).is_none()
}

/// The first `(writer, reader, round)` at which a history is illegal.
pub fn first_history_violation(o: &RegisterSimOutcome) -> Option<(usize, usize, usize)> {
    for (writer, wh) in o.processors.iter().enumerate() {
        for (reader, rh) in o.processors.iter().enumerate() {
            let mut last: Option<u64> = None;
            for read in &rh.reads {
                let got = read.seqs.get(writer).copied().flatten();
                let completed_before = wh
                    .writes
                    .iter()
                    .filter(|w| w.completed_round.is_some_and(|c| c < read.round))
                    .map(|w| w.seq)
                    .max();
                let monotone = last.is_none_or(|l| got.is_some_and(|g| g >= l));
                let fresh = completed_before.is_none_or(|c| got.is_some_and(|g| g >= c));
                let issued = got.is_none_or(|g| {
                    wh.writes
                        .iter()
                        .any(|w| w.seq == g && w.issued_round <= read.round)
                });
                if !(monotone && fresh && issued) {
                    return Some((writer, reader, read.round));
                }
                last = got.or(last);
            }
        }
    }
    None
}

/// A king round after which some live processor still lacked the king's
/// write.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KingViolation {
    pub round: usize,
    pub king: usize,
    pub seq: u64,
    pub lacking: usize,
}

/// Every king round whose write had not reached all live processors by the
/// end of that round. Does not look at the adversary.
pub fn king_violations(trace: &ExecutionTrace<RegisterProtocol>) -> Vec<KingViolation> {
    let mut out = Vec::new();
    for t in 1..trace.states.len() {
        for (king, s) in trace.states[t].iter().enumerate() {
            let Some(seq) = s.completed_in(t) else {
                continue;
            };
            for (j, prev) in trace.states[t - 1].iter().enumerate() {
                let has = trace.states[t][j].kv.seq_of(king).is_some_and(|x| x >= seq);
                if j != king && !prev.is_done() && !has {
                    out.push(KingViolation {
                        round: t,
                        king,
                        seq,
                        lacking: j,
                    });
                }
            }
        }
    }
    out
}

/// Certifies every king round of a TP-complete trace. Traces produced
/// under any other adversary are refused.
pub fn certify_king_soundness(trace: &ExecutionTrace<RegisterProtocol>) -> Result<(), ProtocolError> {
    if *trace.spec.kind() != AdversaryKind::TpComplete {
        return Err(ProtocolError::UnsupportedSpec {
            check: "king soundness",
            required: "tp-complete",
            spec: trace.spec.to_string(),
        });
    }
    match king_violations(trace).first() {
        None => Ok(()),
        Some(v) => Err(ProtocolError::violation(
            trace,
            format!(
                "round {}: {} completed write {} but {} lacks it",
                v.round, v.king, v.seq, v.lacking
            ),
        )),
    }
}
