//! Content digests for protocol states and views.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

/// SHA-256 digest, rendered as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest([u8; 32]);

impl Digest {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Digest of the canonical JSON encoding of `value`.
    ///
    /// Only meaningful for types whose JSON form is deterministic (no
    /// `HashMap` fields).
    pub fn of_json<T: Serialize + ?Sized>(value: &T) -> Self {
        let bytes = serde_json::to_vec(value).expect("state types serialize infallibly");
        Digest(Sha256::digest(&bytes).into())
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.hex()[..12])
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(de::Error::custom)?;
        Ok(Digest(out))
    }
}

/// Incremental hasher used to build structural digests.
pub(crate) struct DigestBuilder(Sha256);

impl DigestBuilder {
    pub(crate) fn new(domain: &str) -> Self {
        let mut h = Sha256::new();
        h.update((domain.len() as u32).to_le_bytes());
        h.update(domain.as_bytes());
        DigestBuilder(h)
    }

    pub(crate) fn u64(mut self, v: u64) -> Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub(crate) fn digest(mut self, d: &Digest) -> Self {
        self.0.update(d.0);
        self
    }

    pub(crate) fn finish(self) -> Digest {
        Digest(self.0.finalize().into())
    }
}

/// Protocol states that can be summarized by a stable digest.
pub trait StateDigest {
    fn state_digest(&self) -> Digest;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let d = DigestBuilder::new("t").u64(7).finish();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s.len(), 66);
        let back: Digest = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn domain_separates() {
        let a = DigestBuilder::new("a").u64(1).finish();
        let b = DigestBuilder::new("b").u64(1).finish();
        assert_ne!(a, b);
        assert_eq!(a, DigestBuilder::new("a").u64(1).finish());
    }
}
