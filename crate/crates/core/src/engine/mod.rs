//! Deterministic synchronous round executor.
//!
//! Each round every processor broadcasts `message(state)`; the adversary
//! picks an RCG; each receiver gets the payloads of its in-neighbours and
//! all states advance simultaneously. Runs are either sampled from a seeded
//! RNG, scripted, or exhaustive over the whole adversary decision tree.

mod trace;
mod view;

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{AdversaryError, AdversarySpec, DEFAULT_ENUMERATION_BUDGET};
use crate::digest::StateDigest;
use crate::graph::Rcg;

pub use trace::{ExecutionTrace, OutputRecord, RoundRecord, TraceOrigin, TraceRecord, TRACE_SCHEMA_VERSION};
pub use view::{extend_digest, initial_digest, View};

/// Default cap on the number of complete executions explored.
pub const DEFAULT_BRANCH_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("round {round}: {rcg:?} is not allowed by {spec}")]
    IllegalRcg { round: usize, rcg: Rcg, spec: String },
    #[error("exhaustive search needs {count} executions, cap is {cap}")]
    BranchCapExceeded { count: u128, cap: u64 },
}

/// A deterministic round-based protocol.
pub trait Protocol {
    type State: Clone + StateDigest + Serialize;
    type Payload: Clone;
    type Output: Clone + Serialize;

    fn init(&self, pid: usize, item: u64) -> Self::State;

    /// Payload broadcast at the start of a round.
    fn message(&self, state: &Self::State) -> Self::Payload;

    /// Next state given this round's deliveries, keyed by sender.
    fn receive(
        &self,
        state: &Self::State,
        received: BTreeMap<usize, Self::Payload>,
    ) -> Self::State;

    fn output(&self, state: &Self::State) -> Option<Self::Output>;
}

/// Budgets for exhaustive exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveLimits {
    /// Per-round enumeration cap.
    pub enumeration_budget: u64,
    /// Cap on the number of complete executions.
    pub branch_cap: u64,
    /// Worker threads over round-1 branches.
    pub jobs: usize,
}

impl Default for ExhaustiveLimits {
    fn default() -> Self {
        ExhaustiveLimits {
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            branch_cap: DEFAULT_BRANCH_CAP,
            jobs: 1,
        }
    }
}

/// Result of checking a property over every execution.
pub enum Verdict<P: Protocol> {
    AllHold { executions: u64 },
    /// The canonically first failing execution.
    Counterexample { trace: Box<ExecutionTrace<P>> },
}

impl<P: Protocol> Verdict<P> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::AllHold { .. })
    }
}

impl<P: Protocol> std::fmt::Debug for Verdict<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::AllHold { executions } => write!(f, "AllHold({executions})"),
            Verdict::Counterexample { trace } => write!(f, "Counterexample({:?})", trace.origin),
        }
    }
}

fn check_inputs(spec: &AdversarySpec, inputs: &[u64]) -> Result<(), EngineError> {
    if inputs.len() != spec.n() {
        return Err(EngineError::InputCount {
            expected: spec.n(),
            got: inputs.len(),
        });
    }
    Ok(())
}

fn initial_states<P: Protocol>(p: &P, inputs: &[u64]) -> Vec<P::State> {
    inputs
        .iter()
        .enumerate()
        .map(|(pid, &item)| p.init(pid, item))
        .collect()
}

/// Advances all processors by one round under `rcg`.
pub fn step<P: Protocol>(p: &P, states: &[P::State], rcg: &Rcg) -> Vec<P::State> {
    let payloads: Vec<P::Payload> = states.iter().map(|s| p.message(s)).collect();
    states
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let received: BTreeMap<usize, P::Payload> = rcg
                .in_neighbors(r)
                .iter()
                .map(|snd| (snd, payloads[snd].clone()))
                .collect();
            p.receive(s, received)
        })
        .collect()
}

fn derive_outputs<P: Protocol>(
    p: &P,
    states: &[Vec<P::State>],
) -> Vec<Option<OutputRecord<P::Output>>> {
    let n = states[0].len();
    (0..n)
        .map(|pid| {
            states.iter().enumerate().find_map(|(round, row)| {
                p.output(&row[pid]).map(|value| OutputRecord { round, value })
            })
        })
        .collect()
}

fn assemble<P: Protocol>(
    p: &P,
    spec: &AdversarySpec,
    origin: TraceOrigin,
    rcgs: Vec<Rcg>,
    states: Vec<Vec<P::State>>,
) -> ExecutionTrace<P> {
    let outputs = derive_outputs(p, &states);
    ExecutionTrace {
        n: spec.n(),
        spec: spec.clone(),
        origin,
        rcgs,
        states,
        outputs,
    }
}

/// Seeded run of exactly `rounds` rounds. The per-run RNG stream is
/// `ChaCha8Rng::seed_from_u64(seed)`, drawn once per round.
pub fn run<P: Protocol>(
    p: &P,
    spec: &AdversarySpec,
    rounds: usize,
    inputs: &[u64],
    seed: u64,
) -> Result<ExecutionTrace<P>, EngineError> {
    run_until(p, spec, rounds, inputs, seed, |_| false)
}

/// Seeded run that stops early once `done(states)` holds at the end of a
/// round (or before the first one).
pub fn run_until<P: Protocol>(
    p: &P,
    spec: &AdversarySpec,
    max_rounds: usize,
    inputs: &[u64],
    seed: u64,
    done: impl Fn(&[P::State]) -> bool,
) -> Result<ExecutionTrace<P>, EngineError> {
    check_inputs(spec, inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![initial_states(p, inputs)];
    let mut rcgs = Vec::new();
    for round in 0..max_rounds {
        if done(states.last().expect("non-empty")) {
            break;
        }
        let rcg = spec.sample_with(round, &mut rng);
        let next = step(p, states.last().expect("non-empty"), &rcg);
        rcgs.push(rcg);
        states.push(next);
    }
    Ok(assemble(p, spec, TraceOrigin::Seeded(seed), rcgs, states))
}

/// Replays a caller-supplied RCG sequence, rejecting illegal rounds.
pub fn run_scripted<P: Protocol>(
    p: &P,
    spec: &AdversarySpec,
    rcgs: &[Rcg],
    inputs: &[u64],
) -> Result<ExecutionTrace<P>, EngineError> {
    check_inputs(spec, inputs)?;
    let mut states = vec![initial_states(p, inputs)];
    for (round, rcg) in rcgs.iter().enumerate() {
        if !spec.validate(round, rcg)? {
            return Err(EngineError::IllegalRcg {
                round,
                rcg: rcg.clone(),
                spec: spec.to_string(),
            });
        }
        let next = step(p, states.last().expect("non-empty"), rcg);
        states.push(next);
    }
    Ok(assemble(p, spec, TraceOrigin::Scripted, rcgs.to_vec(), states))
}

/// Per-round canonical enumerations for `rounds` rounds, after checking
/// the branch cap against their product.
pub fn round_choices(
    spec: &AdversarySpec,
    rounds: usize,
    limits: &ExhaustiveLimits,
) -> Result<Vec<Vec<Rcg>>, EngineError> {
    let choices = (0..rounds)
        .map(|round| Ok(spec.enumerate(round, limits.enumeration_budget)?.collect()))
        .collect::<Result<Vec<Vec<Rcg>>, AdversaryError>>()?;
    let total = choices
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    if total > limits.branch_cap as u128 {
        return Err(EngineError::BranchCapExceeded {
            count: total,
            cap: limits.branch_cap,
        });
    }
    Ok(choices)
}

/// Number of complete executions of `rounds` rounds: the product of the
/// per-round enumeration sizes.
pub fn branch_count(
    spec: &AdversarySpec,
    rounds: usize,
    enumeration_budget: u64,
) -> Result<u128, EngineError> {
    let mut total: u128 = 1;
    for round in 0..rounds {
        let k = spec.enumerate(round, enumeration_budget)?.len() as u128;
        total = total.saturating_mul(k);
    }
    Ok(total)
}

struct Dfs<'a, P: Protocol> {
    p: &'a P,
    spec: &'a AdversarySpec,
    choices: &'a [Vec<Rcg>],
    rcgs: Vec<Rcg>,
    states: Vec<Vec<P::State>>,
    branch: Vec<usize>,
}

impl<P: Protocol> Dfs<'_, P> {
    fn go<F>(&mut self, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(ExecutionTrace<P>) -> ControlFlow<()>,
    {
        let depth = self.rcgs.len();
        if depth == self.choices.len() {
            let trace = assemble(
                self.p,
                self.spec,
                TraceOrigin::Branch(self.branch.clone()),
                self.rcgs.clone(),
                self.states.clone(),
            );
            return f(trace);
        }
        for (k, rcg) in self.choices[depth].iter().enumerate() {
            let next = step(self.p, self.states.last().expect("non-empty"), rcg);
            self.rcgs.push(rcg.clone());
            self.states.push(next);
            self.branch.push(k);
            let flow = self.go(f);
            self.branch.pop();
            self.states.pop();
            self.rcgs.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Visits every execution of `rounds` rounds in canonical branch order.
/// Returns the number of executions visited.
pub fn for_each_execution<P, F>(
    p: &P,
    spec: &AdversarySpec,
    rounds: usize,
    inputs: &[u64],
    limits: &ExhaustiveLimits,
    mut f: F,
) -> Result<u64, EngineError>
where
    P: Protocol,
    F: FnMut(&ExecutionTrace<P>) -> ControlFlow<()>,
{
    check_inputs(spec, inputs)?;
    let choices = round_choices(spec, rounds, limits)?;
    let mut visited = 0u64;
    let mut dfs = Dfs {
        p,
        spec,
        choices: &choices,
        rcgs: Vec::new(),
        states: vec![initial_states(p, inputs)],
        branch: Vec::new(),
    };
    let _ = dfs.go(&mut |t| {
        visited += 1;
        f(&t)
    });
    Ok(visited)
}

/// Checks `property` on every complete execution of the decision tree.
///
/// With `limits.jobs > 1` the round-1 branches are spread over worker
/// threads; the reported counterexample is still the canonically first.
pub fn run_exhaustive<P, F>(
    p: &P,
    spec: &AdversarySpec,
    rounds: usize,
    inputs: &[u64],
    limits: &ExhaustiveLimits,
    property: F,
) -> Result<Verdict<P>, EngineError>
where
    P: Protocol + Sync,
    P::State: Send + Sync,
    P::Output: Send,
    F: Fn(&ExecutionTrace<P>) -> bool + Sync,
{
    check_inputs(spec, inputs)?;
    let choices = round_choices(spec, rounds, limits)?;
    let init = initial_states(p, inputs);
    if rounds == 0 {
        let trace = assemble(p, spec, TraceOrigin::Branch(vec![]), vec![], vec![init]);
        return Ok(if property(&trace) {
            Verdict::AllHold { executions: 1 }
        } else {
            Verdict::Counterexample {
                trace: Box::new(trace),
            }
        });
    }

    // Explore one round-1 subtree; stop at its first failure.
    let explore = |top: usize| -> (u64, Option<ExecutionTrace<P>>) {
        let rcg = &choices[0][top];
        let mut dfs = Dfs {
            p,
            spec,
            choices: &choices,
            rcgs: vec![rcg.clone()],
            states: vec![init.clone(), step(p, &init, rcg)],
            branch: vec![top],
        };
        let mut count = 0u64;
        let mut failure = None;
        let _ = dfs.go(&mut |t| {
            count += 1;
            if property(&t) {
                ControlFlow::Continue(())
            } else {
                failure = Some(t);
                ControlFlow::Break(())
            }
        });
        (count, failure)
    };

    let tops = choices[0].len();
    let jobs = limits.jobs.clamp(1, tops.max(1));
    let best = AtomicUsize::new(usize::MAX);
    let results: Mutex<Vec<(usize, u64, Option<ExecutionTrace<P>>)>> = Mutex::new(Vec::new());
    let worker = |w: usize| {
        for top in (w..tops).step_by(jobs) {
            if top > best.load(Ordering::SeqCst) {
                break;
            }
            let (count, failure) = explore(top);
            if failure.is_some() {
                best.fetch_min(top, Ordering::SeqCst);
            }
            results
                .lock()
                .expect("worker panicked")
                .push((top, count, failure));
        }
    };
    if jobs == 1 {
        worker(0);
    } else {
        std::thread::scope(|s| {
            for w in 0..jobs {
                let worker = &worker;
                s.spawn(move || worker(w));
            }
        });
    }
    let mut results = results.into_inner().expect("worker panicked");
    results.sort_by_key(|r| r.0);
    let executions = results.iter().map(|r| r.1).sum();
    match results.into_iter().find_map(|r| r.2) {
        Some(t) => Ok(Verdict::Counterexample { trace: Box::new(t) }),
        None => Ok(Verdict::AllHold { executions }),
    }
}

/// Full-information protocol: every round each processor broadcasts its
/// whole view. Optionally outputs its view digest after `output_after`
/// rounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullInformation {
    pub output_after: Option<usize>,
}

impl Protocol for FullInformation {
    type State = View;
    type Payload = View;
    type Output = crate::digest::Digest;

    fn init(&self, pid: usize, item: u64) -> View {
        View::initial(pid, item)
    }

    fn message(&self, state: &View) -> View {
        state.clone()
    }

    fn receive(&self, state: &View, received: BTreeMap<usize, View>) -> View {
        state.extend(received)
    }

    fn output(&self, state: &View) -> Option<crate::digest::Digest> {
        match self.output_after {
            Some(k) if state.round() >= k => Some(state.digest()),
            _ => None,
        }
    }
}
