//! Message adversaries as per-round predicates over RCGs, with seeded
//! samplers and exhaustive enumerators.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{self, GraphError, Rcg};
use crate::procset::MAX_PROCESSORS;

/// Default cap on the number of graphs an enumeration may produce or scan.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("graph has {got} processors, adversary expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration needs {count} graphs, budget is {cap}")]
    BudgetExceeded { count: u128, cap: u64 },
    #[error("invalid adversary: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Unordered processor pair, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair(usize, usize);

impl Pair {
    pub fn new(a: usize, b: usize) -> Result<Self, AdversaryError> {
        if a == b {
            return Err(AdversaryError::InvalidSpec(format!(
                "pair {a}-{b} needs two distinct processors"
            )));
        }
        Ok(Pair(a.min(b), a.max(b)))
    }

    pub fn low(self) -> usize {
        self.0
    }

    pub fn high(self) -> usize {
        self.1
    }

    pub fn contains(self, p: usize) -> bool {
        self.0 == p || self.1 == p
    }

    /// All pairs of `{0..n}` in lexicographic order.
    pub fn all(n: usize) -> Vec<Pair> {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| Pair(a, b)))
            .collect()
    }
}

impl std::str::FromStr for Pair {
    type Err = AdversaryError;

    /// Parses `"A-B"`.
    fn from_str(item: &str) -> Result<Self, AdversaryError> {
        let bad = || AdversaryError::InvalidSpec(format!("bad pair {item:?}, expected A-B"));
        let (a, b) = item.trim().split_once('-').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Pair::new(a, b)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl serde::Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Pair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Pair::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// The cyclic order in which pairs exchange messages under TP-pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairSchedule {
    pairs: Vec<Pair>,
}

impl PairSchedule {
    /// All `n(n-1)/2` pairs in lexicographic order.
    pub fn round_robin(n: usize) -> Result<Self, AdversaryError> {
        Self::explicit(n, Pair::all(n))
    }

    /// A schedule is accepted when every cyclic window of `n(n-1)/2`
    /// consecutive rounds contains every pair.
    pub fn explicit(n: usize, pairs: Vec<Pair>) -> Result<Self, AdversaryError> {
        if n < 2 {
            return Err(AdversaryError::InvalidSpec(
                "tp-pairs needs at least 2 processors".into(),
            ));
        }
        if let Some(p) = pairs.iter().find(|p| p.high() >= n) {
            return Err(AdversaryError::InvalidSpec(format!(
                "pair {p} out of range for n={n}"
            )));
        }
        let all = Pair::all(n);
        let m = all.len();
        if pairs.len() < m {
            return Err(AdversaryError::InvalidSpec(format!(
                "schedule of length {} cannot cover all {m} pairs",
                pairs.len()
            )));
        }
        for start in 0..pairs.len() {
            let window: Vec<Pair> = (0..m).map(|t| pairs[(start + t) % pairs.len()]).collect();
            if let Some(missing) = all.iter().find(|p| !window.contains(p)) {
                return Err(AdversaryError::InvalidSpec(format!(
                    "pair {missing} absent from the {m}-round window starting at round {start}"
                )));
            }
        }
        Ok(PairSchedule { pairs })
    }

    /// Parses `"1-2,0-1,0-2"`.
    pub fn parse(n: usize, s: &str) -> Result<Self, AdversaryError> {
        let pairs = s.split(',').map(str::parse).collect::<Result<Vec<Pair>, _>>()?;
        Self::explicit(n, pairs)
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Active pair of the 0-based `round`.
    pub fn pair_for_round(&self, round: usize) -> Pair {
        self.pairs[round % self.pairs.len()]
    }

    /// The first `k` rounds of the cyclic schedule.
    pub fn prefix(&self, k: usize) -> Vec<Pair> {
        (0..k).map(|r| self.pair_for_round(r)).collect()
    }
}

impl fmt::Display for PairSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.pairs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    /// Every RCG has a directed walk through all processors.
    Tp,
    /// Every RCG contains a tournament.
    TpComplete,
    /// Every RCG is strongly connected.
    Sc,
    /// Some SCC has at least `k` processors.
    Kcc(usize),
    /// One scheduled pair exchanges per round; at most one direction purged.
    TpPairs(PairSchedule),
    /// TP-complete, except that both directions of `Pair` may be purged.
    TpCompleteExcept(Pair),
}

/// An adversary predicate instantiated for `n` processors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdversarySpec {
    n: usize,
    kind: AdversaryKind,
}

impl AdversarySpec {
    pub fn new(n: usize, kind: AdversaryKind) -> Result<Self, AdversaryError> {
        if n == 0 || n > MAX_PROCESSORS {
            return Err(GraphError::BadProcessorCount(n).into());
        }
        match &kind {
            AdversaryKind::Kcc(k) if *k < 2 || *k > n => {
                return Err(AdversaryError::InvalidSpec(format!(
                    "kcc:{k} needs 2 <= k <= n = {n}"
                )))
            }
            AdversaryKind::TpPairs(s) => {
                // Re-check in case the schedule was built for a different n.
                PairSchedule::explicit(n, s.pairs.clone())?;
            }
            AdversaryKind::TpCompleteExcept(p) if p.high() >= n => {
                return Err(AdversaryError::InvalidSpec(format!(
                    "pair {p} out of range for n={n}"
                )))
            }
            _ => {}
        }
        Ok(AdversarySpec { n, kind })
    }

    pub fn tp(n: usize) -> Result<Self, AdversaryError> {
        Self::new(n, AdversaryKind::Tp)
    }

    pub fn tp_complete(n: usize) -> Result<Self, AdversaryError> {
        Self::new(n, AdversaryKind::TpComplete)
    }

    pub fn tp_pairs(n: usize, schedule: PairSchedule) -> Result<Self, AdversaryError> {
        Self::new(n, AdversaryKind::TpPairs(schedule))
    }

    /// Parses the CLI syntax: `tp`, `tp-complete`, `sc`, `kcc:K`,
    /// `tp-pairs:RR`, `tp-pairs:1-2,0-1,0-2`, `tp-complete-except:0-1`.
    pub fn parse(n: usize, s: &str) -> Result<Self, AdversaryError> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let kind = match (head, arg) {
            ("tp", None) => AdversaryKind::Tp,
            ("tp-complete", None) => AdversaryKind::TpComplete,
            ("sc", None) => AdversaryKind::Sc,
            ("kcc", Some(k)) => AdversaryKind::Kcc(k.parse().map_err(|_| {
                AdversaryError::InvalidSpec(format!("bad kcc size {k:?}"))
            })?),
            ("tp-pairs", Some("RR")) | ("tp-pairs", None) => {
                AdversaryKind::TpPairs(PairSchedule::round_robin(n)?)
            }
            ("tp-pairs", Some(list)) => AdversaryKind::TpPairs(PairSchedule::parse(n, list)?),
            ("tp-complete-except", Some(p)) => AdversaryKind::TpCompleteExcept(p.parse()?),
            _ => {
                return Err(AdversaryError::InvalidSpec(format!(
                    "unknown adversary {s:?}"
                )))
            }
        };
        Self::new(n, kind)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    /// Whether `g` is a legal RCG for the 0-based `round`.
    pub fn validate(&self, round: usize, g: &Rcg) -> Result<bool, AdversaryError> {
        if g.n() != self.n {
            return Err(AdversaryError::DimensionMismatch {
                expected: self.n,
                got: g.n(),
            });
        }
        Ok(match &self.kind {
            AdversaryKind::Tp => graph::has_traversal_path(g),
            AdversaryKind::TpComplete => graph::contains_tournament(g),
            AdversaryKind::Sc => graph::is_strongly_connected(g),
            AdversaryKind::Kcc(k) => graph::scc_condensation(g).largest() >= *k,
            AdversaryKind::TpPairs(s) => {
                let p = s.pair_for_round(round);
                let ab = g.has_edge(p.low(), p.high());
                let ba = g.has_edge(p.high(), p.low());
                g.edge_count() == ab as usize + ba as usize && (ab || ba)
            }
            AdversaryKind::TpCompleteExcept(p) => (0..self.n).all(|i| {
                (i + 1..self.n)
                    .all(|j| (i, j) == (p.low(), p.high()) || g.has_edge(i, j) || g.has_edge(j, i))
            }),
        })
    }

    /// Draws a legal RCG for `round` from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, round: usize, rng: &mut R) -> Rcg {
        let n = self.n;
        let mut g = Rcg::empty(n).expect("n validated at construction");
        let add = |g: &mut Rcg, a: usize, b: usize| {
            g.add_edge(a, b).expect("indices in range");
        };
        let per_pair = |g: &mut Rcg, a: usize, b: usize, rng: &mut R, allow_none: bool| {
            let choices = if allow_none { 4 } else { 3 };
            match rng.gen_range(0..choices) {
                0 => g.add_edge(a, b).expect("in range"),
                1 => g.add_edge(b, a).expect("in range"),
                2 => {
                    g.add_edge(a, b).expect("in range");
                    g.add_edge(b, a).expect("in range");
                }
                _ => {}
            }
        };
        let extras = |g: &mut Rcg, rng: &mut R| {
            for a in 0..n {
                for b in 0..n {
                    if a != b && !g.has_edge(a, b) && rng.gen_bool(0.5) {
                        g.add_edge(a, b).expect("in range");
                    }
                }
            }
        };
        match &self.kind {
            AdversaryKind::TpComplete => {
                for p in Pair::all(n) {
                    per_pair(&mut g, p.low(), p.high(), rng, false);
                }
            }
            AdversaryKind::TpCompleteExcept(except) => {
                for p in Pair::all(n) {
                    per_pair(&mut g, p.low(), p.high(), rng, p == *except);
                }
            }
            AdversaryKind::TpPairs(s) => {
                let p = s.pair_for_round(round);
                per_pair(&mut g, p.low(), p.high(), rng, false);
            }
            AdversaryKind::Tp => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                for w in order.windows(2) {
                    add(&mut g, w[0], w[1]);
                }
                extras(&mut g, rng);
            }
            AdversaryKind::Sc | AdversaryKind::Kcc(_) => {
                let size = match self.kind {
                    AdversaryKind::Kcc(k) => k,
                    _ => n,
                };
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                if size > 1 {
                    for t in 0..size {
                        add(&mut g, order[t], order[(t + 1) % size]);
                    }
                }
                extras(&mut g, rng);
            }
        }
        g
    }

    /// Deterministic single-round sample.
    pub fn sample(&self, round: usize, seed: u64) -> Rcg {
        self.sample_with(round, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Number of graphs the enumerator has to generate or scan.
    pub fn enumeration_cost(&self) -> u128 {
        let n = self.n as u32;
        let m = n * n.saturating_sub(1) / 2;
        match &self.kind {
            AdversaryKind::TpComplete => 3u128.saturating_pow(m),
            AdversaryKind::TpCompleteExcept(_) => 3u128.saturating_pow(m - 1) * 4,
            AdversaryKind::TpPairs(_) => 3,
            AdversaryKind::Tp | AdversaryKind::Sc | AdversaryKind::Kcc(_) => {
                2u128.saturating_pow(2 * m)
            }
        }
    }

    /// Every legal RCG for `round`, in canonical order, each once.
    pub fn enumerate(
        &self,
        round: usize,
        budget: u64,
    ) -> Result<std::vec::IntoIter<Rcg>, AdversaryError> {
        let cost = self.enumeration_cost();
        if cost > budget as u128 {
            return Err(AdversaryError::BudgetExceeded {
                count: cost,
                cap: budget,
            });
        }
        let n = self.n;
        let mut out = match &self.kind {
            AdversaryKind::TpComplete => per_pair_product(n, &Pair::all(n), None),
            AdversaryKind::TpCompleteExcept(p) => per_pair_product(n, &Pair::all(n), Some(*p)),
            AdversaryKind::TpPairs(s) => per_pair_product(n, &[s.pair_for_round(round)], None),
            AdversaryKind::Tp | AdversaryKind::Sc | AdversaryKind::Kcc(_) => {
                let slots: Vec<(usize, usize)> = (0..n)
                    .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
                    .collect();
                let mut v = Vec::new();
                for code in 0..1u64 << slots.len() {
                    let g = Rcg::from_edges(
                        n,
                        slots
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| code >> k & 1 == 1)
                            .map(|(_, &e)| e),
                    )?;
                    if self.validate(round, &g)? {
                        v.push(g);
                    }
                }
                v
            }
        };
        out.sort();
        out.dedup();
        Ok(out.into_iter())
    }
}

/// Product over `pairs` of the three legal deliveries (four for `relaxed`).
fn per_pair_product(n: usize, pairs: &[Pair], relaxed: Option<Pair>) -> Vec<Rcg> {
    let mut acc = vec![Rcg::empty(n).expect("n validated")];
    for &p in pairs {
        let options = if Some(p) == relaxed { 4 } else { 3 };
        let mut next = Vec::with_capacity(acc.len() * options);
        for g in &acc {
            for c in 0..options {
                let mut h = g.clone();
                match c {
                    0 => h.add_edge(p.low(), p.high()).expect("in range"),
                    1 => h.add_edge(p.high(), p.low()).expect("in range"),
                    2 => {
                        h.add_edge(p.low(), p.high()).expect("in range");
                        h.add_edge(p.high(), p.low()).expect("in range");
                    }
                    _ => {}
                }
                next.push(h);
            }
        }
        acc = next;
    }
    acc
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AdversaryKind::Tp => f.write_str("tp"),
            AdversaryKind::TpComplete => f.write_str("tp-complete"),
            AdversaryKind::Sc => f.write_str("sc"),
            AdversaryKind::Kcc(k) => write!(f, "kcc:{k}"),
            AdversaryKind::TpPairs(s) => write!(f, "tp-pairs:{s}"),
            AdversaryKind::TpCompleteExcept(p) => write!(f, "tp-complete-except:{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, e: &[(usize, usize)]) -> Rcg {
        Rcg::from_edges(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn parse_and_display() {
        for s in ["tp", "tp-complete", "sc", "kcc:2", "tp-complete-except:0-1"] {
            assert_eq!(AdversarySpec::parse(3, s).unwrap().to_string(), s);
        }
        let rr = AdversarySpec::parse(3, "tp-pairs:RR").unwrap();
        assert_eq!(rr.to_string(), "tp-pairs:0-1,0-2,1-2");
        let fig = AdversarySpec::parse(3, "tp-pairs:1-2,0-1,0-2").unwrap();
        assert_eq!(fig.to_string(), "tp-pairs:1-2,0-1,0-2");
        assert!(AdversarySpec::parse(3, "kcc:1").is_err());
        assert!(AdversarySpec::parse(3, "kcc:4").is_err());
        assert!(AdversarySpec::parse(3, "tp-pairs:0-1,0-2").is_err());
        assert!(AdversarySpec::parse(3, "tp-pairs:0-1,0-1,0-2").is_err());
        assert!(AdversarySpec::parse(3, "tpc").is_err());
        assert!(AdversarySpec::parse(0, "tp").is_err());
        assert!(AdversarySpec::parse(1, "tp-pairs:RR").is_err());
    }

    #[test]
    fn schedule_windows() {
        // A longer list is fine as long as every 3-window covers all pairs.
        let s = PairSchedule::parse(3, "0-1,0-2,1-2,0-1,0-2,1-2").unwrap();
        assert_eq!(s.pair_for_round(7), Pair::new(0, 2).unwrap());
        assert!(PairSchedule::parse(3, "0-1,0-2,1-2,1-2").is_err());
    }

    #[test]
    fn validate_examples() {
        let tpc = AdversarySpec::tp_complete(3).unwrap();
        assert!(tpc.validate(5, &g(3, &[(0, 1), (1, 2), (2, 0)])).unwrap());

        let sched = PairSchedule::parse(3, "1-2,0-1,0-2").unwrap();
        let pairs = AdversarySpec::tp_pairs(3, sched).unwrap();
        assert!(pairs.validate(0, &g(3, &[(1, 2)])).unwrap());
        assert!(!pairs.validate(0, &g(3, &[])).unwrap());
        assert!(!pairs.validate(0, &g(3, &[(1, 2), (0, 1)])).unwrap());
        assert!(pairs.validate(1, &g(3, &[(1, 0)])).unwrap());

        let sc = AdversarySpec::parse(3, "sc").unwrap();
        assert!(!sc.validate(0, &g(3, &[(0, 1), (1, 2)])).unwrap());

        let kcc = AdversarySpec::parse(3, "kcc:2").unwrap();
        assert!(kcc.validate(0, &g(3, &[(0, 1), (1, 0)])).unwrap());
        assert!(!kcc.validate(0, &g(3, &[(0, 1), (1, 2)])).unwrap());

        assert_eq!(
            tpc.validate(0, &g(2, &[(0, 1)])),
            Err(AdversaryError::DimensionMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn enumeration_counts() {
        let count = |n, s: &str| {
            AdversarySpec::parse(n, s)
                .unwrap()
                .enumerate(0, DEFAULT_ENUMERATION_BUDGET)
                .unwrap()
                .count()
        };
        assert_eq!(count(2, "tp-complete"), 3);
        assert_eq!(count(3, "tp-complete"), 27);
        assert_eq!(count(4, "tp-complete"), 729);
        assert_eq!(count(3, "tp-pairs:RR"), 3);
        assert_eq!(count(3, "tp-complete-except:0-1"), 36);
    }

    #[test]
    fn pairs_enumeration_is_the_three_deliveries() {
        let spec = AdversarySpec::parse(3, "tp-pairs:RR").unwrap();
        let got: Vec<Rcg> = spec.enumerate(0, 10).unwrap().collect();
        assert_eq!(got, vec![g(3, &[(0, 1)]), g(3, &[(0, 1), (1, 0)]), g(3, &[(1, 0)])]);
    }

    #[test]
    fn budget_guard() {
        let spec = AdversarySpec::tp(5).unwrap();
        match spec.enumerate(0, DEFAULT_ENUMERATION_BUDGET) {
            Err(AdversaryError::BudgetExceeded { count, cap }) => {
                assert_eq!(count, 1 << 20);
                assert_eq!(cap, DEFAULT_ENUMERATION_BUDGET);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sample_pairs_has_three_outcomes() {
        let spec = AdversarySpec::parse(2, "tp-pairs:RR").unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            seen.insert(spec.sample(0, seed));
        }
        assert_eq!(
            seen.into_iter().collect::<Vec<_>>(),
            vec![g(2, &[(0, 1)]), g(2, &[(0, 1), (1, 0)]), g(2, &[(1, 0)])]
        );
        let tpc = AdversarySpec::tp_complete(2).unwrap();
        assert_eq!(tpc.sample(0, 9), tpc.sample(0, 9));
    }
}
