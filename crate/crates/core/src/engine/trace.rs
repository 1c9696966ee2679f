//! Execution traces and their JSON form.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::Protocol;
use crate::adversary::AdversarySpec;
use crate::digest::{Digest, StateDigest};
use crate::graph::Rcg;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Where the RCG sequence of a trace came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceOrigin {
    /// Sampled from a seeded RNG.
    Seeded(u64),
    /// Supplied by the caller.
    Scripted,
    /// A branch of the exhaustive tree: per round, the index into that
    /// round's canonical enumeration.
    Branch(Vec<usize>),
}

impl Serialize for TraceOrigin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TraceOrigin::Seeded(seed) => s.serialize_u64(*seed),
            TraceOrigin::Scripted => s.serialize_str("scripted"),
            TraceOrigin::Branch(path) => {
                let body: Vec<String> = path.iter().map(|i| i.to_string()).collect();
                s.serialize_str(&format!("exhaustive-branch:{}", body.join(".")))
            }
        }
    }
}

impl<'de> Deserialize<'de> for TraceOrigin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Seed(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Seed(s) => Ok(TraceOrigin::Seeded(s)),
            Raw::Text(t) if t == "scripted" => Ok(TraceOrigin::Scripted),
            Raw::Text(t) => {
                let body = t
                    .strip_prefix("exhaustive-branch:")
                    .ok_or_else(|| de::Error::custom(format!("unknown trace origin {t:?}")))?;
                if body.is_empty() {
                    return Ok(TraceOrigin::Branch(Vec::new()));
                }
                body.split('.')
                    .map(|x| x.parse().map_err(de::Error::custom))
                    .collect::<Result<_, _>>()
                    .map(TraceOrigin::Branch)
            }
        }
    }
}

/// Output of one processor and the round (0 = before any round) in
/// which it first appeared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord<O> {
    pub round: usize,
    pub value: O,
}

/// A complete synchronous execution.
///
/// `states[0]` holds the initial states and `states[r]` the states at the
/// end of round `r`, so `states.len() == rcgs.len() + 1`.
pub struct ExecutionTrace<P: Protocol> {
    pub n: usize,
    pub spec: AdversarySpec,
    pub origin: TraceOrigin,
    pub rcgs: Vec<Rcg>,
    pub states: Vec<Vec<P::State>>,
    pub outputs: Vec<Option<OutputRecord<P::Output>>>,
}

impl<P: Protocol> Clone for ExecutionTrace<P> {
    fn clone(&self) -> Self {
        ExecutionTrace {
            n: self.n,
            spec: self.spec.clone(),
            origin: self.origin.clone(),
            rcgs: self.rcgs.clone(),
            states: self.states.clone(),
            outputs: self.outputs.clone(),
        }
    }
}

impl<P: Protocol> std::fmt::Debug for ExecutionTrace<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExecutionTrace")
            .field("n", &self.n)
            .field("spec", &self.spec.to_string())
            .field("origin", &self.origin)
            .field("rcgs", &self.rcgs)
            .finish_non_exhaustive()
    }
}

impl<P: Protocol> ExecutionTrace<P> {
    pub fn rounds(&self) -> usize {
        self.rcgs.len()
    }

    pub fn final_states(&self) -> &[P::State] {
        self.states.last().expect("a trace always holds initial states")
    }

    /// Serializable record; `dump_states` includes full states per round.
    pub fn to_record(&self, protocol: Option<&str>, dump_states: bool) -> TraceRecord {
        let digests = |r: usize| -> Vec<Digest> {
            self.states[r].iter().map(StateDigest::state_digest).collect()
        };
        let dump = |r: usize| -> Option<Vec<serde_json::Value>> {
            dump_states.then(|| {
                self.states[r]
                    .iter()
                    .map(|s| serde_json::to_value(s).expect("states serialize"))
                    .collect()
            })
        };
        TraceRecord {
            schema_version: TRACE_SCHEMA_VERSION,
            n: self.n,
            spec: self.spec.to_string(),
            protocol: protocol.map(str::to_owned),
            seed: self.origin.clone(),
            inputs: Vec::new(),
            initial_digests: digests(0),
            initial_states: dump(0),
            rounds: self
                .rcgs
                .iter()
                .enumerate()
                .map(|(k, rcg)| RoundRecord {
                    rcg: rcg.clone(),
                    digests: digests(k + 1),
                    states: dump(k + 1),
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|o| {
                    o.as_ref().map(|rec| OutputRecord {
                        round: rec.round,
                        value: serde_json::to_value(&rec.value).expect("outputs serialize"),
                    })
                })
                .collect(),
            violation: None,
        }
    }
}

/// JSON form of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub schema_version: u32,
    pub n: usize,
    pub spec: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    pub seed: TraceOrigin,
    /// Initial items, when known; lets a trace be replayed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<u64>,
    pub initial_digests: Vec<Digest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_states: Option<Vec<serde_json::Value>>,
    pub rounds: Vec<RoundRecord>,
    pub outputs: Vec<Option<OutputRecord<serde_json::Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub rcg: Rcg,
    pub digests: Vec<Digest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<serde_json::Value>>,
}
