//! Id-set gossip and the snapshot protocol built on it.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ProtocolError;
use crate::adversary::AdversarySpec;
use crate::digest::{Digest, StateDigest};
use crate::engine::{self, ExecutionTrace, Protocol};
use crate::graph::{contains_tournament, Rcg};
use crate::procset::ProcSet;

/// Id set of one processor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IdSetState {
    pub owner: usize,
    /// Every id heard of so far, directly or transitively. Always holds
    /// `owner`.
    pub s: ProcSet,
    /// `(round, set)` once the processor has returned.
    pub returned: Option<(usize, ProcSet)>,
    pub round: usize,
}

impl IdSetState {
    fn new(owner: usize) -> Self {
        IdSetState {
            owner,
            s: ProcSet::singleton(owner),
            returned: None,
            round: 0,
        }
    }
}

impl StateDigest for IdSetState {
    fn state_digest(&self) -> Digest {
        Digest::of_json(self)
    }
}

/// Broadcast the id set, union on receipt. Never returns.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gossip;

impl Protocol for Gossip {
    type State = IdSetState;
    type Payload = ProcSet;
    type Output = ProcSet;

    fn init(&self, pid: usize, _item: u64) -> IdSetState {
        IdSetState::new(pid)
    }

    fn message(&self, state: &IdSetState) -> ProcSet {
        state.s
    }

    fn receive(&self, state: &IdSetState, received: BTreeMap<usize, ProcSet>) -> IdSetState {
        IdSetState {
            s: received.values().fold(state.s, |acc, &x| acc.union(x)),
            round: state.round + 1,
            ..state.clone()
        }
    }

    fn output(&self, _: &IdSetState) -> Option<ProcSet> {
        None
    }
}

/// Gossip that returns `S` at the end of round `l` when `|S| = l`, then
/// keeps relaying the frozen set.
#[derive(Debug, Clone, Copy, Default)]
pub struct Snapshot;

impl Protocol for Snapshot {
    type State = IdSetState;
    type Payload = ProcSet;
    type Output = ProcSet;

    fn init(&self, pid: usize, _item: u64) -> IdSetState {
        IdSetState::new(pid)
    }

    fn message(&self, state: &IdSetState) -> ProcSet {
        state.s
    }

    fn receive(&self, state: &IdSetState, received: BTreeMap<usize, ProcSet>) -> IdSetState {
        let round = state.round + 1;
        if state.returned.is_some() {
            return IdSetState {
                round,
                ..state.clone()
            };
        }
        let s = received.values().fold(state.s, |acc, &x| acc.union(x));
        IdSetState {
            owner: state.owner,
            s,
            returned: (s.len() == round).then_some((round, s)),
            round,
        }
    }

    fn output(&self, state: &IdSetState) -> Option<ProcSet> {
        state.returned.map(|(_, s)| s)
    }
}

/// Rounds of gossip needed to emulate one TP-complete round over TP.
pub fn emulation_rounds(n: usize) -> usize {
    2 * n - 1
}

/// Emulated delivery graph: `i -> j` iff `i` is in `S_j`.
pub fn emulated_graph(sets: &[ProcSet]) -> Rcg {
    let mut g = Rcg::empty(sets.len()).expect("one set per processor");
    for (j, s) in sets.iter().enumerate() {
        for i in s.iter().filter(|&i| i != j) {
            g.add_edge(i, j).expect("ids are in range");
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct Emulation {
    pub emulated: Rcg,
    pub sets: Vec<ProcSet>,
    pub trace: ExecutionTrace<Gossip>,
}

/// Checks a finished gossip trace: its emulated graph must contain a
/// tournament.
pub fn check_emulation(trace: &ExecutionTrace<Gossip>) -> Result<Rcg, ProtocolError> {
    let sets: Vec<ProcSet> = trace.final_states().iter().map(|s| s.s).collect();
    let g = emulated_graph(&sets);
    if contains_tournament(&g) {
        Ok(g)
    } else {
        let missing = (0..g.n())
            .flat_map(|i| (i + 1..g.n()).map(move |j| (i, j)))
            .find(|&(i, j)| !g.has_edge(i, j) && !g.has_edge(j, i))
            .expect("a non-tournament misses some pair");
        Err(ProtocolError::violation(
            trace,
            format!(
                "after {} rounds neither {} nor {} heard of the other",
                trace.rounds(),
                missing.0,
                missing.1
            ),
        ))
    }
}

/// Seeded gossip run of `2n - 1` rounds under TP, returning the emulated
/// TP-complete round.
pub fn emulate_tp_complete_over_tp(n: usize, seed: u64) -> Result<Emulation, ProtocolError> {
    let spec = AdversarySpec::tp(n)?;
    let inputs: Vec<u64> = (0..n as u64).collect();
    let trace = engine::run(&Gossip, &spec, emulation_rounds(n), &inputs, seed)?;
    let emulated = check_emulation(&trace)?;
    let sets = trace.final_states().iter().map(|s| s.s).collect();
    Ok(Emulation {
        emulated,
        sets,
        trace,
    })
}

/// Per-round gossip monotonicity on a trace produced under TP.
///
/// Every `S_i` only grows, and for every pair still uncovered at the start
/// of a round, `|H_i| + |H_j|` grows during it, where `H_i` is the set of
/// processors whose id set holds `i`. Returns the first offending round.
pub fn check_gossip_progress(trace: &ExecutionTrace<Gossip>) -> Result<(), (usize, String)> {
    let n = trace.n;
    let holders = |states: &[IdSetState], i: usize| -> usize {
        states.iter().filter(|s| s.s.contains(i)).count()
    };
    for r in 1..trace.states.len() {
        let (before, after) = (&trace.states[r - 1], &trace.states[r]);
        for (b, a) in before.iter().zip(after) {
            if !b.s.is_subset(a.s) {
                return Err((r, format!("S_{} shrank from {} to {}", b.owner, b.s, a.s)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if before[j].s.contains(i) || before[i].s.contains(j) {
                    continue;
                }
                let was = holders(before, i) + holders(before, j);
                let now = holders(after, i) + holders(after, j);
                if now <= was {
                    return Err((r, format!("uncovered pair ({i},{j}) made no progress")));
                }
            }
        }
    }
    Ok(())
}

/// True iff every set holds its owner and the sets form a chain under
/// inclusion.
pub fn validate_snapshot(outputs: &[(usize, ProcSet)]) -> bool {
    outputs.iter().all(|&(p, s)| s.contains(p))
        && outputs.iter().all(|&(_, a)| {
            outputs
                .iter()
                .all(|&(_, b)| a.is_subset(b) || b.is_subset(a))
        })
}

/// Checks a snapshot trace: every processor returned within `n` rounds
/// and the returned sets are snapshots.
pub fn check_snapshot(trace: &ExecutionTrace<Snapshot>) -> Result<Vec<ProcSet>, ProtocolError> {
    let n = trace.n;
    let mut outputs = Vec::with_capacity(n);
    for (p, out) in trace.outputs.iter().enumerate() {
        match out {
            Some(rec) if rec.round <= n => outputs.push((p, rec.value)),
            Some(rec) => {
                return Err(ProtocolError::violation(
                    trace,
                    format!("processor {p} returned only at round {}", rec.round),
                ))
            }
            None => {
                return Err(ProtocolError::violation(
                    trace,
                    format!("processor {p} did not return within {} rounds", trace.rounds()),
                ))
            }
        }
    }
    if !validate_snapshot(&outputs) {
        let shown: Vec<String> = outputs.iter().map(|(p, s)| format!("{p}:{s}")).collect();
        return Err(ProtocolError::violation(
            trace,
            format!("returned sets are not snapshots: {}", shown.join(" ")),
        ));
    }
    Ok(outputs.into_iter().map(|(_, s)| s).collect())
}

/// Seeded `n`-round snapshot run under TP-complete.
pub fn snapshot_over_tp_complete(
    n: usize,
    seed: u64,
) -> Result<(Vec<ProcSet>, ExecutionTrace<Snapshot>), ProtocolError> {
    let spec = AdversarySpec::tp_complete(n)?;
    let inputs: Vec<u64> = (0..n as u64).collect();
    let trace = engine::run(&Snapshot, &spec, n, &inputs, seed)?;
    let sets = check_snapshot(&trace)?;
    Ok((sets, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_exhaustive, run_scripted, ExhaustiveLimits};

    fn set(xs: &[usize]) -> ProcSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn single_processor() {
        let e = emulate_tp_complete_over_tp(1, 0).unwrap();
        assert_eq!(e.emulated.edge_count(), 0);
        let (sets, trace) = snapshot_over_tp_complete(1, 0).unwrap();
        assert_eq!(sets, vec![set(&[0])]);
        assert_eq!(trace.outputs[0].as_ref().unwrap().round, 1);
    }

    #[test]
    fn two_processors_exhaustive() {
        let spec = AdversarySpec::tp(2).unwrap();
        let v = run_exhaustive(&Gossip, &spec, 3, &[0, 1], &ExhaustiveLimits::default(), |t| {
            check_emulation(t).is_ok() && check_gossip_progress(t).is_ok()
        })
        .unwrap();
        assert!(matches!(v, engine::Verdict::AllHold { executions: 27 }));
    }

    #[test]
    fn snapshot_transitive_first_round() {
        let spec = AdversarySpec::tp_complete(3).unwrap();
        let g = Rcg::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let t = run_scripted(&Snapshot, &spec, &[g], &[0, 1, 2]).unwrap();
        assert_eq!(t.final_states()[0].returned, Some((1, set(&[0]))));
        assert_eq!(t.final_states()[1].returned, None);
    }

    #[test]
    fn gossip_sampled_properties() {
        for n in 2..=5 {
            for seed in 0..300 {
                let e = emulate_tp_complete_over_tp(n, seed).unwrap();
                assert!(check_gossip_progress(&e.trace).is_ok(), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn snapshot_validation_examples() {
        assert!(validate_snapshot(&[(0, set(&[0]))]));
        assert!(validate_snapshot(&[(0, set(&[0, 1])), (1, set(&[0, 1]))]));
        assert!(!validate_snapshot(&[(0, set(&[0])), (1, set(&[1]))]));
        assert!(!validate_snapshot(&[(0, set(&[1]))]));
    }

    #[test]
    fn snapshot_exhaustive_n3() {
        let spec = AdversarySpec::tp_complete(3).unwrap();
        let v = run_exhaustive(&Snapshot, &spec, 3, &[0, 1, 2], &ExhaustiveLimits::default(), |t| {
            check_snapshot(t).is_ok()
        })
        .unwrap();
        assert!(matches!(v, engine::Verdict::AllHold { executions: 19683 }), "{v:?}");
    }
}
