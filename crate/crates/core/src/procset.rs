//! Small sets of processor indices backed by a `u64` bitmask.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Largest processor count supported anywhere in the crate.
pub const MAX_PROCESSORS: usize = 64;

/// A set of processor indices in `[0, 64)`.
///
/// Iteration is always ascending, and the serialized form is the sorted
/// list of members, so two equal sets always serialize identically.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcSet(u64);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub fn singleton(p: usize) -> Self {
        debug_assert!(p < MAX_PROCESSORS);
        ProcSet(1u64 << p)
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_PROCESSORS);
        if n == MAX_PROCESSORS {
            ProcSet(u64::MAX)
        } else {
            ProcSet((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        ProcSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, p: usize) -> bool {
        p < MAX_PROCESSORS && self.0 & (1u64 << p) != 0
    }

    pub fn insert(&mut self, p: usize) {
        debug_assert!(p < MAX_PROCESSORS);
        self.0 |= 1u64 << p;
    }

    pub fn remove(&mut self, p: usize) {
        if p < MAX_PROCESSORS {
            self.0 &= !(1u64 << p);
        }
    }

    pub fn with(mut self, p: usize) -> Self {
        self.insert(p);
        self
    }

    pub fn union(self, other: ProcSet) -> Self {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProcSet) -> Self {
        ProcSet(self.0 & other.0)
    }

    pub fn difference(self, other: ProcSet) -> Self {
        ProcSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Members {
        Members(self.0)
    }
}

/// Ascending iterator over the members of a [`ProcSet`].
#[derive(Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Members {}

impl IntoIterator for ProcSet {
    type Item = usize;
    type IntoIter = Members;

    fn into_iter(self) -> Members {
        self.iter()
    }
}

impl FromIterator<usize> for ProcSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ProcSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ProcSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProcSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = members.iter().find(|&&p| p >= MAX_PROCESSORS) {
            return Err(de::Error::custom(format!(
                "processor index {bad} out of range"
            )));
        }
        Ok(members.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_algebra() {
        let a: ProcSet = [0, 2, 5].into_iter().collect();
        let b = ProcSet::singleton(2).with(3);
        assert_eq!(a.union(b).iter().collect::<Vec<_>>(), vec![0, 2, 3, 5]);
        assert_eq!(a.intersection(b), ProcSet::singleton(2));
        assert!(ProcSet::singleton(2).is_subset(a));
        assert!(!b.is_subset(a));
        assert_eq!(a.len(), 3);
        assert_eq!(a.first(), Some(0));
        assert_eq!(ProcSet::full(64).len(), 64);
        assert_eq!(ProcSet::full(0), ProcSet::EMPTY);
    }

    #[test]
    fn serializes_sorted() {
        let a: ProcSet = [4, 1].into_iter().collect();
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1,4]");
        let back: ProcSet = serde_json::from_str("[4,1,1]").unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<ProcSet>("[64]").is_err());
    }
}
