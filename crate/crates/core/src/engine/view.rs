//! Full-information views with structural sharing and memoized digests.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::digest::{Digest, DigestBuilder, StateDigest};

/// Digest of a processor's view before any round.
pub fn initial_digest(owner: usize, item: u64) -> Digest {
    DigestBuilder::new("adversim/view/init")
        .u64(owner as u64)
        .u64(item)
        .finish()
}

/// Digest of a view after appending round `round` (1-based) whose received
/// messages are `received`, given the digest `prev` of the view before it.
///
/// `received` must be in ascending sender order.
pub fn extend_digest<I>(prev: &Digest, round: usize, received: I) -> Digest
where
    I: IntoIterator<Item = (usize, Digest)>,
{
    let mut b = DigestBuilder::new("adversim/view/round")
        .digest(prev)
        .u64(round as u64);
    let mut count = 0u64;
    let mut last = None;
    for (sender, d) in received {
        debug_assert!(last.map_or(true, |l| l < sender), "senders must ascend");
        last = Some(sender);
        b = b.u64(sender as u64).digest(&d);
        count += 1;
    }
    b.u64(count).finish()
}

/// A processor's complete history: its initial item and, per elapsed
/// round, the views it received (absent sender = no delivery).
///
/// Cloning is O(1); equality compares digests.
#[derive(Clone)]
pub struct View(Arc<ViewNode>);

struct ViewNode {
    owner: usize,
    item: u64,
    round: usize,
    prev: Option<View>,
    received: BTreeMap<usize, View>,
    digest: Digest,
}

impl View {
    pub fn initial(owner: usize, item: u64) -> View {
        View(Arc::new(ViewNode {
            owner,
            item,
            round: 0,
            prev: None,
            received: BTreeMap::new(),
            digest: initial_digest(owner, item),
        }))
    }

    /// Appends one round. Every received view must have exactly as many
    /// rounds as `self`.
    pub fn extend(&self, received: BTreeMap<usize, View>) -> View {
        for (s, v) in &received {
            assert_eq!(
                v.round(),
                self.round(),
                "view from {s} is from round {} but receiver is at round {}",
                v.round(),
                self.round()
            );
        }
        let round = self.round() + 1;
        let digest = extend_digest(
            &self.digest(),
            round,
            received.iter().map(|(&s, v)| (s, v.digest())),
        );
        View(Arc::new(ViewNode {
            owner: self.owner(),
            item: self.item(),
            round,
            prev: Some(self.clone()),
            received,
            digest,
        }))
    }

    pub fn owner(&self) -> usize {
        self.0.owner
    }

    pub fn item(&self) -> u64 {
        self.0.item
    }

    /// Rounds elapsed.
    pub fn round(&self) -> usize {
        self.0.round
    }

    pub fn digest(&self) -> Digest {
        self.0.digest
    }

    /// Messages received in the 1-based round `r`.
    pub fn received_at(&self, r: usize) -> Option<&BTreeMap<usize, View>> {
        if r == 0 || r > self.round() {
            return None;
        }
        let mut v = self;
        while v.round() > r {
            v = v.0.prev.as_ref().expect("round > 0 has a predecessor");
        }
        Some(&v.0.received)
    }

    /// Per-round received maps, oldest first.
    pub fn rounds(&self) -> Vec<&BTreeMap<usize, View>> {
        let mut out = Vec::with_capacity(self.round());
        let mut v = self;
        while let Some(prev) = v.0.prev.as_ref() {
            out.push(&v.0.received);
            v = prev;
        }
        out.reverse();
        out
    }

    /// Recomputes every digest and round count from scratch.
    pub fn is_consistent(&self) -> bool {
        let mut chain = Vec::new();
        let mut v = self;
        loop {
            chain.push(v);
            match v.0.prev.as_ref() {
                Some(p) => v = p,
                None => break,
            }
        }
        chain.reverse();
        let base = chain[0];
        if base.round() != 0 || base.digest() != initial_digest(base.owner(), base.item()) {
            return false;
        }
        for w in chain.windows(2) {
            let (prev, cur) = (w[0], w[1]);
            if cur.round() != prev.round() + 1 || cur.owner() != base.owner() {
                return false;
            }
            let ok_children = cur
                .0
                .received
                .iter()
                .all(|(&s, v)| s == v.owner() && v.round() == prev.round() && v.is_consistent());
            let d = extend_digest(
                &prev.digest(),
                cur.round(),
                cur.0.received.iter().map(|(&s, v)| (s, v.digest())),
            );
            if !ok_children || d != cur.digest() {
                return false;
            }
        }
        true
    }
}

impl PartialEq for View {
    fn eq(&self, other: &Self) -> bool {
        self.digest() == other.digest()
    }
}

impl Eq for View {}

impl std::hash::Hash for View {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.digest().hash(state)
    }
}

impl fmt::Debug for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "View(p{}, r{}, {})",
            self.owner(),
            self.round(),
            &self.digest().hex()[..12]
        )
    }
}

impl StateDigest for View {
    fn state_digest(&self) -> Digest {
        self.digest()
    }
}

struct RoundMap<'a>(&'a BTreeMap<usize, View>);

impl Serialize for RoundMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }
}

impl Serialize for View {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("View", 4)?;
        st.serialize_field("owner", &self.owner())?;
        st.serialize_field("item", &self.item())?;
        st.serialize_field("digest", &self.digest())?;
        let rounds: Vec<RoundMap<'_>> = self.rounds().into_iter().map(RoundMap).collect();
        st.serialize_field("rounds", &rounds)?;
        st.end()
    }
}
