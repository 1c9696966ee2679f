//! Synchronous dynamic networks under message adversaries.
//!
//! * [`graph`]: round communication graphs, tournaments, kings, SCCs.
//! * [`adversary`]: adversary predicates, samplers and enumerators.
//! * [`engine`]: deterministic round executor and exhaustive explorer.
//! * [`protocols`]: adversary emulations, snapshot, and the king-based
//!   register simulation.
//! * [`complex`]: the TP-pairs protocol complex as a chromatic subdivision.
//! * [`oracle`]: brute-force validators, kept independent of the above.

pub mod adversary;
pub mod complex;
pub mod digest;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod procset;
pub mod protocols;

pub use adversary::{AdversaryKind, AdversarySpec, Pair, PairSchedule};
pub use digest::Digest;
pub use graph::{Rcg, Tournament};
pub use procset::ProcSet;
