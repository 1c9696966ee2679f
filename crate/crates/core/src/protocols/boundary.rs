//! Executions in which neither endpoint of an exempt pair ever becomes
//! king.

use std::collections::HashSet;

use super::register::{RegisterProtocol, RegisterState};
use super::ProtocolError;
use crate::adversary::{AdversaryKind, AdversarySpec, Pair};
use crate::digest::{Digest, StateDigest};
use crate::engine::{self, ExecutionTrace, TraceOrigin};
use crate::graph::Rcg;

#[derive(Debug, Clone)]
pub struct BoundaryWitness {
    pub pair: Pair,
    pub depth: usize,
    /// Per round, index into the canonical enumeration.
    pub branch: Vec<usize>,
    pub trace: ExecutionTrace<RegisterProtocol>,
}

struct Search<'a> {
    protocol: RegisterProtocol,
    pair: Pair,
    depth: usize,
    choices: &'a [Rcg],
    dead: HashSet<(usize, Vec<Digest>)>,
    nodes: u64,
}

impl Search<'_> {
    fn go(&mut self, states: &[RegisterState], branch: &mut Vec<usize>) -> bool {
        let level = branch.len();
        if level == self.depth {
            return true;
        }
        let key = (level, states.iter().map(StateDigest::state_digest).collect::<Vec<_>>());
        if self.dead.contains(&key) {
            return false;
        }
        for (k, rcg) in self.choices.iter().enumerate() {
            self.nodes += 1;
            let next = engine::step(&self.protocol, states, rcg);
            let round = level + 1;
            let fired = [self.pair.low(), self.pair.high()]
                .iter()
                .any(|&p| next[p].completed_in(round).is_some());
            if fired {
                continue;
            }
            branch.push(k);
            if self.go(&next, branch) {
                return true;
            }
            branch.pop();
        }
        self.dead.insert(key);
        false
    }
}

/// Searches the exhaustive tree of `spec` (which must exempt one pair) to
/// `depth` rounds for the canonically first branch in which neither
/// endpoint of the exempt pair completes a write.
///
/// Processors get `depth + 1` writes so that nobody finishes inside the
/// horizon. Returns the witness together with the number of tree nodes
/// visited, or `None` if every branch fires an endpoint.
pub fn find_boundary_witness(
    spec: &AdversarySpec,
    depth: usize,
    enumeration_budget: u64,
) -> Result<(Option<BoundaryWitness>, u64), ProtocolError> {
    let AdversaryKind::TpCompleteExcept(pair) = *spec.kind() else {
        return Err(ProtocolError::UnsupportedSpec {
            check: "boundary witness",
            required: "tp-complete-except",
            spec: spec.to_string(),
        });
    };
    let n = spec.n();
    let protocol = RegisterProtocol::new(n, depth as u64 + 1);
    let choices: Vec<Rcg> = spec.enumerate(0, enumeration_budget)?.collect();
    let inputs = vec![0; n];
    let init: Vec<RegisterState> = (0..n).map(|p| engine::Protocol::init(&protocol, p, 0)).collect();
    let mut search = Search {
        protocol,
        pair,
        depth,
        choices: &choices,
        dead: HashSet::new(),
        nodes: 0,
    };
    let mut branch = Vec::new();
    if !search.go(&init, &mut branch) {
        return Ok((None, search.nodes));
    }
    let rcgs: Vec<Rcg> = branch.iter().map(|&k| choices[k].clone()).collect();
    let mut trace = engine::run_scripted(&protocol, spec, &rcgs, &inputs)?;
    trace.origin = TraceOrigin::Branch(branch.clone());
    Ok((
        Some(BoundaryWitness {
            pair,
            depth,
            branch,
            trace,
        }),
        search.nodes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_exists_at_n3() {
        let spec = AdversarySpec::parse(3, "tp-complete-except:0-1").unwrap();
        let (w, _) = find_boundary_witness(&spec, 4, 1_000_000).unwrap();
        let w = w.expect("a witness exists");
        assert_eq!(w.branch.len(), 4);
        for (r, s) in w.trace.states.iter().enumerate().skip(1) {
            assert!(s[0].completed_in(r).is_none() && s[1].completed_in(r).is_none());
        }
    }

    #[test]
    fn no_witness_under_full_tournaments() {
        let spec = AdversarySpec::tp_complete(3).unwrap();
        assert!(find_boundary_witness(&spec, 2, 1_000_000).is_err());
    }
}
