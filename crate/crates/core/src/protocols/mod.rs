//! Protocols run on top of the engine.
//!
//! * [`gossip`]: id-set gossip emulating TP-complete over TP, and the
//!   snapshot protocol over TP-complete.
//! * [`register`]: SWSR register simulation driven by the king condition.
//! * [`pairs`]: TP-pairs and TP-complete translations.
//! * [`boundary`]: search for executions in which the king condition never
//!   fires once a pair is exempt from the tournament constraint.

pub mod boundary;
pub mod gossip;
pub mod pairs;
pub mod register;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::engine::{EngineError, ExecutionTrace, Protocol};
use crate::graph::Rcg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    /// A protocol guarantee failed on a concrete execution.
    #[error("violation under {spec}: {description}")]
    Violation {
        description: String,
        spec: String,
        rcgs: Vec<Rcg>,
    },
    #[error("{check} is only meaningful under {required}, trace was produced under {spec}")]
    UnsupportedSpec {
        check: &'static str,
        required: &'static str,
        spec: String,
    },
}

impl ProtocolError {
    pub(crate) fn violation<P: Protocol>(trace: &ExecutionTrace<P>, description: String) -> Self {
        ProtocolError::Violation {
            description,
            spec: trace.spec.to_string(),
            rcgs: trace.rcgs.clone(),
        }
    }
}
