//! Translations between TP-pairs and TP-complete.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ProtocolError;
use crate::adversary::{AdversarySpec, PairSchedule};
use crate::digest::{Digest, StateDigest};
use crate::engine::{self, ExecutionTrace, Protocol};
use crate::graph::{contains_tournament, Rcg};
use crate::procset::ProcSet;

/// Number of TP-pairs rounds covering every pair once.
pub fn pair_rounds(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PairState {
    pub owner: usize,
    pub item: u64,
    pub round: usize,
    /// Per round (0-based), senders accepted that round.
    pub accepted: Vec<ProcSet>,
    /// Payload accepted from each sender.
    pub collected: BTreeMap<usize, u64>,
}

impl StateDigest for PairState {
    fn state_digest(&self) -> Digest {
        Digest::of_json(self)
    }
}

/// Sends the same frozen payload every round and accepts a message only
/// from this round's scheduled partner.
///
/// Over TP-pairs this collects one TP-complete round; over TP-complete it
/// projects every round onto its scheduled pair.
#[derive(Debug, Clone)]
pub struct PairFilter {
    pub schedule: PairSchedule,
}

impl Protocol for PairFilter {
    type State = PairState;
    type Payload = (usize, u64);
    type Output = BTreeMap<usize, u64>;

    fn init(&self, pid: usize, item: u64) -> PairState {
        PairState {
            owner: pid,
            item,
            round: 0,
            accepted: Vec::new(),
            collected: BTreeMap::new(),
        }
    }

    fn message(&self, state: &PairState) -> (usize, u64) {
        (state.owner, state.item)
    }

    fn receive(&self, state: &PairState, received: BTreeMap<usize, (usize, u64)>) -> PairState {
        let pair = self.schedule.pair_for_round(state.round);
        let mut next = state.clone();
        let mut accepted = ProcSet::EMPTY;
        if pair.contains(state.owner) {
            for (&from, &(_, item)) in &received {
                if from != state.owner && pair.contains(from) {
                    accepted.insert(from);
                    next.collected.insert(from, item);
                }
            }
        }
        next.accepted.push(accepted);
        next.round += 1;
        next
    }

    fn output(&self, state: &PairState) -> Option<BTreeMap<usize, u64>> {
        (state.round >= self.schedule.len()).then(|| state.collected.clone())
    }
}

/// Emulated TP-complete round: `i -> j` iff `j` collected `i`'s payload.
pub fn collected_graph(trace: &ExecutionTrace<PairFilter>) -> Rcg {
    let mut g = Rcg::empty(trace.n).expect("trace has a valid size");
    for s in trace.final_states() {
        for &i in s.collected.keys() {
            g.add_edge(i, s.owner).expect("senders are in range");
        }
    }
    g
}

/// Checks a TP-pairs collection trace of exactly `n(n-1)/2` rounds.
pub fn check_collection(trace: &ExecutionTrace<PairFilter>) -> Result<Rcg, ProtocolError> {
    let m = pair_rounds(trace.n);
    if trace.rounds() != m {
        return Err(ProtocolError::violation(
            trace,
            format!("collection ran {} rounds instead of {m}", trace.rounds()),
        ));
    }
    let g = collected_graph(trace);
    if !contains_tournament(&g) {
        return Err(ProtocolError::violation(
            trace,
            format!("collected graph {g:?} contains no tournament"),
        ));
    }
    Ok(g)
}

/// Seeded run of the collection protocol under round-robin TP-pairs.
pub fn tp_pairs_to_tp_complete(
    n: usize,
    seed: u64,
) -> Result<(Rcg, ExecutionTrace<PairFilter>), ProtocolError> {
    let schedule = PairSchedule::round_robin(n)?;
    let spec = AdversarySpec::tp_pairs(n, schedule.clone())?;
    let inputs: Vec<u64> = (0..n as u64).collect();
    let trace = engine::run(&PairFilter { schedule }, &spec, pair_rounds(n), &inputs, seed)?;
    let g = check_collection(&trace)?;
    Ok((g, trace))
}

/// Per-round deliveries the filter accepted.
pub fn accepted_deliveries(trace: &ExecutionTrace<PairFilter>) -> Vec<Rcg> {
    (0..trace.rounds())
        .map(|r| {
            let mut g = Rcg::empty(trace.n).expect("trace has a valid size");
            for s in trace.final_states() {
                for i in s.accepted[r] {
                    g.add_edge(i, s.owner).expect("senders are in range");
                }
            }
            g
        })
        .collect()
}

/// Checks a projection trace: each accepted round equals the actual RCG
/// restricted to the scheduled pair, and is a legal TP-pairs round.
pub fn check_projection(
    trace: &ExecutionTrace<PairFilter>,
    schedule: &PairSchedule,
) -> Result<Vec<Rcg>, ProtocolError> {
    let pairs_spec = AdversarySpec::tp_pairs(trace.n, schedule.clone())?;
    let accepted = accepted_deliveries(trace);
    for (r, (got, rcg)) in accepted.iter().zip(&trace.rcgs).enumerate() {
        let pair = schedule.pair_for_round(r);
        let expected = rcg.restrict_to(ProcSet::singleton(pair.low()).with(pair.high()));
        if *got != expected {
            return Err(ProtocolError::violation(
                trace,
                format!("round {}: accepted {got:?}, restriction is {expected:?}", r + 1),
            ));
        }
        if !pairs_spec.validate(r, got)? {
            return Err(ProtocolError::violation(
                trace,
                format!("round {}: {got:?} is not a legal {pairs_spec} round", r + 1),
            ));
        }
    }
    Ok(accepted)
}

/// Seeded run of the projection protocol under TP-complete.
pub fn tp_complete_to_tp_pairs(
    n: usize,
    schedule: PairSchedule,
    seed: u64,
) -> Result<(Vec<Rcg>, ExecutionTrace<PairFilter>), ProtocolError> {
    let spec = AdversarySpec::tp_complete(n)?;
    let inputs: Vec<u64> = (0..n as u64).collect();
    let rounds = schedule.len();
    let filter = PairFilter { schedule };
    let trace = engine::run(&filter, &spec, rounds, &inputs, seed)?;
    let rounds = check_projection(&trace, &filter.schedule)?;
    Ok((rounds, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_exhaustive, run_scripted, ExhaustiveLimits};

    #[test]
    fn round_counts() {
        assert_eq!(pair_rounds(2), 1);
        assert_eq!(pair_rounds(3), 3);
        assert_eq!(pair_rounds(5), 10);
    }

    #[test]
    fn collection_n3_exhaustive() {
        let schedule = PairSchedule::round_robin(3).unwrap();
        let spec = AdversarySpec::tp_pairs(3, schedule.clone()).unwrap();
        let v = run_exhaustive(
            &PairFilter { schedule },
            &spec,
            3,
            &[0, 1, 2],
            &ExhaustiveLimits::default(),
            |t| check_collection(t).is_ok_and(|g| g.edge_count() >= 3),
        )
        .unwrap();
        assert!(matches!(v, engine::Verdict::AllHold { executions: 27 }));
    }

    #[test]
    fn projection_of_cycle() {
        let schedule = PairSchedule::parse(3, "0-1,1-2,0-2").unwrap();
        let spec = AdversarySpec::tp_complete(3).unwrap();
        let cycle = Rcg::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let filter = PairFilter {
            schedule: schedule.clone(),
        };
        let t = run_scripted(&filter, &spec, &[cycle.clone(), cycle.clone(), cycle], &[0, 1, 2]).unwrap();
        let rounds = check_projection(&t, &schedule).unwrap();
        assert_eq!(rounds[0].edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(rounds[2].edges().collect::<Vec<_>>(), vec![(2, 0)]);
    }

    #[test]
    fn projection_n2_sampled() {
        for seed in 0..20 {
            let (rounds, _) = tp_complete_to_tp_pairs(2, PairSchedule::round_robin(2).unwrap(), seed).unwrap();
            assert_eq!(rounds.len(), 1);
        }
    }
}
