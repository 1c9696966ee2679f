//! Round communication graphs and the digraph facts the protocols rely on:
//! traversal paths, tournaments, kings and strongly connected components.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::procset::{ProcSet, MAX_PROCESSORS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("processor count {0} out of range (1..={MAX_PROCESSORS})")]
    BadProcessorCount(usize),
    #[error("edge {0}->{1} has an endpoint outside [0, {2})")]
    OutOfRange(usize, usize, usize),
    #[error("self-loop on {0}")]
    SelfLoop(usize),
    #[error("not a tournament: pair {{{0},{1}}} has {2} directed edges")]
    NotATournament(usize, usize, usize),
}

/// One round's message-delivery graph: `s -> r` means the message from `s`
/// to `r` was delivered.
///
/// Stored as per-sender bitmasks. Self-delivery is implicit and never stored.
/// The derived `Hash`/`Eq` are canonical; `Ord` is the lexicographic order of
/// the sorted edge lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rcg {
    n: usize,
    out: Vec<u64>,
}

impl Rcg {
    /// Graph on `n` processors with no delivered messages.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_PROCESSORS {
            return Err(GraphError::BadProcessorCount(n));
        }
        Ok(Rcg { n, out: vec![0; n] })
    }

    /// Every message delivered.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut g = Rcg::empty(n)?;
        let all = ProcSet::full(n).bits();
        for s in 0..n {
            g.out[s] = all & !(1u64 << s);
        }
        Ok(g)
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Rcg::empty(n)?;
        for (s, r) in edges {
            g.add_edge(s, r)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, s: usize, r: usize) -> Result<(), GraphError> {
        if s >= self.n || r >= self.n {
            return Err(GraphError::OutOfRange(s, r, self.n));
        }
        if s == r {
            return Err(GraphError::SelfLoop(s));
        }
        self.out[s] |= 1u64 << r;
        Ok(())
    }

    pub fn remove_edge(&mut self, s: usize, r: usize) {
        if s < self.n && r < self.n {
            self.out[s] &= !(1u64 << r);
        }
    }

    pub fn has_edge(&self, s: usize, r: usize) -> bool {
        s < self.n && r < self.n && self.out[s] & (1u64 << r) != 0
    }

    pub fn out_neighbors(&self, s: usize) -> ProcSet {
        ProcSet::from_bits(self.out[s])
    }

    pub fn in_neighbors(&self, r: usize) -> ProcSet {
        (0..self.n).filter(|&s| self.has_edge(s, r)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Edges in ascending `(sender, receiver)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, &m)| ProcSet::from_bits(m).iter().map(move |r| (s, r)))
    }

    /// Keeps only edges with both endpoints in `keep`.
    pub fn restrict_to(&self, keep: ProcSet) -> Rcg {
        let mut g = self.clone();
        for s in 0..self.n {
            g.out[s] = if keep.contains(s) {
                self.out[s] & keep.bits()
            } else {
                0
            };
        }
        g
    }

    /// Graphviz rendering with vertex labels `p0 .. p{n-1}`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph rcg {\n");
        for v in 0..self.n {
            let _ = writeln!(s, "  p{v};");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(s, "  p{a} -> p{b};");
        }
        s.push_str("}\n");
        s
    }
}

impl std::fmt::Debug for Rcg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rcg(n={}, [", self.n)?;
        for (k, (a, b)) in self.edges().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        write!(f, "])")
    }
}

impl Ord for Rcg {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.edges().cmp(other.edges()))
    }
}

impl PartialOrd for Rcg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Serialize, Deserialize)]
struct RcgRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Rcg {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RcgRepr {
            n: self.n,
            edges: self.edges().map(|(a, b)| [a, b]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rcg {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = RcgRepr::deserialize(deserializer)?;
        Rcg::from_edges(repr.n, repr.edges.into_iter().map(|[a, b]| (a, b)))
            .map_err(serde::de::Error::custom)
    }
}

/// A complete graph with exactly one orientation per pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tournament {
    graph: Rcg,
}

impl Tournament {
    pub fn from_rcg(g: &Rcg) -> Result<Self, GraphError> {
        for i in 0..g.n() {
            for j in i + 1..g.n() {
                let k = g.has_edge(i, j) as usize + g.has_edge(j, i) as usize;
                if k != 1 {
                    return Err(GraphError::NotATournament(i, j, k));
                }
            }
        }
        Ok(Tournament { graph: g.clone() })
    }

    /// `i_beats_j(i, j)` is queried once for each `i < j`.
    pub fn from_fn(
        n: usize,
        mut i_beats_j: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, GraphError> {
        let mut g = Rcg::empty(n)?;
        for i in 0..n {
            for j in i + 1..n {
                if i_beats_j(i, j) {
                    g.add_edge(i, j)?;
                } else {
                    g.add_edge(j, i)?;
                }
            }
        }
        Ok(Tournament { graph: g })
    }

    /// Every tournament on `n` vertices, pair bits in `(0,1), (0,2), ..`
    /// order. There are `2^(n(n-1)/2)` of them.
    pub fn all(n: usize) -> impl Iterator<Item = Tournament> {
        let m = n * n.saturating_sub(1) / 2;
        assert!(m < 64, "too many tournaments to enumerate");
        (0..1u64 << m).map(move |code| {
            let mut bit = 0;
            Tournament::from_fn(n, |_, _| {
                let b = code >> bit & 1 == 0;
                bit += 1;
                b
            })
            .expect("valid processor count")
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn beats(&self, i: usize, j: usize) -> bool {
        self.graph.has_edge(i, j)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.graph.out_neighbors(v).len()
    }

    pub fn as_rcg(&self) -> &Rcg {
        &self.graph
    }
}

/// Strongly connected components and the condensation DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// `component[v]` is the component index of vertex `v`.
    pub component: Vec<usize>,
    /// Components ordered by their smallest member.
    pub members: Vec<ProcSet>,
    /// Edge `a -> b` iff some vertex of `a` delivers to some vertex of `b`.
    pub dag: Vec<ProcSet>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn largest(&self) -> usize {
        self.members.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Kahn's algorithm, always releasing the smallest ready component.
    pub fn topological_order(&self) -> Vec<usize> {
        let k = self.members.len();
        let mut indeg = vec![0usize; k];
        for succ in &self.dag {
            for b in succ.iter() {
                indeg[b] += 1;
            }
        }
        let mut ready: ProcSet = (0..k).filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(k);
        while let Some(c) = ready.first() {
            ready.remove(c);
            order.push(c);
            for b in self.dag[c].iter() {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.insert(b);
                }
            }
        }
        order
    }
}

/// Tarjan's algorithm; components renumbered by smallest vertex.
pub fn scc_condensation(g: &Rcg) -> Condensation {
    struct Tarjan<'a> {
        g: &'a Rcg,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        found: Vec<ProcSet>,
    }

    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for w in self.g.out_neighbors(v) {
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = ProcSet::EMPTY;
                loop {
                    let w = self.stack.pop().expect("tarjan stack underflow");
                    self.on_stack[w] = false;
                    comp.insert(w);
                    if w == v {
                        break;
                    }
                }
                self.found.push(comp);
            }
        }
    }

    let n = g.n();
    let mut t = Tarjan {
        g,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        found: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut members = t.found;
    members.sort_by_key(|c| c.first());
    let mut component = vec![0; n];
    for (c, set) in members.iter().enumerate() {
        for v in set.iter() {
            component[v] = c;
        }
    }
    let mut dag = vec![ProcSet::EMPTY; members.len()];
    for (a, b) in g.edges() {
        if component[a] != component[b] {
            dag[component[a]].insert(component[b]);
        }
    }
    Condensation {
        component,
        members,
        dag,
    }
}

/// Whether some (not necessarily simple) directed walk visits every vertex.
///
/// Equivalent to the condensation DAG having a Hamiltonian path, which holds
/// iff its topological order is consecutively connected.
pub fn has_traversal_path(g: &Rcg) -> bool {
    let c = scc_condensation(g);
    let order = c.topological_order();
    order.windows(2).all(|w| c.dag[w[0]].contains(w[1]))
}

/// Whether every unordered pair has at least one delivered direction.
pub fn contains_tournament(g: &Rcg) -> bool {
    (0..g.n()).all(|i| (i + 1..g.n()).all(|j| g.has_edge(i, j) || g.has_edge(j, i)))
}

pub fn is_strongly_connected(g: &Rcg) -> bool {
    scc_condensation(g).len() == 1
}

/// Hamiltonian path by insertion: each vertex goes before the first path
/// vertex it beats, or at the end.
pub fn tournament_spanning_path(t: &Tournament) -> Vec<usize> {
    let mut path: Vec<usize> = Vec::with_capacity(t.n());
    for v in 0..t.n() {
        match path.iter().position(|&u| t.beats(v, u)) {
            Some(pos) => path.insert(pos, v),
            None => path.push(v),
        }
    }
    path
}

/// A vertex of maximum out-degree, smallest index on ties. Such a vertex
/// reaches every other vertex within two hops.
pub fn find_king(t: &Tournament) -> usize {
    let mut best = 0;
    for v in 1..t.n() {
        if t.out_degree(v) > t.out_degree(best) {
            best = v;
        }
    }
    best
}
