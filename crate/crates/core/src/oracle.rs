//! Brute-force validators.
//!
//! Everything here is written naively on purpose and only touches the
//! plain graph types: transitive closure by cubic iteration, permutation
//! search, explicit BFS. None of it calls the algorithms it checks.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{find_king, tournament_spanning_path, Rcg, Tournament};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} oracle supports n <= {max}, got {n}")]
    SizeGuard { what: &'static str, n: usize, max: usize },
    #[error("{what} oracle supports depth <= {max}, got {depth}")]
    DepthGuard {
        what: &'static str,
        depth: usize,
        max: usize,
    },
}

fn guard(what: &'static str, n: usize, max: usize) -> Result<(), OracleError> {
    if n == 0 || n > max {
        return Err(OracleError::SizeGuard { what, n, max });
    }
    Ok(())
}

/// Reflexive transitive closure by Warshall iteration.
pub fn transitive_closure(g: &Rcg) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
        for (j, cell) in row.iter_mut().enumerate() {
            if g.has_edge(i, j) {
                *cell = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm) until it
/// returns `true`.
fn any_permutation(n: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    if f(&a) {
        return true;
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            if f(&a) {
                return true;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    false
}

/// Ground truth for "some directed walk visits every processor".
///
/// Requires every pair to be ordered by reachability and an ordering of
/// all vertices in which each reaches the next.
pub fn reachability_pair_oracle(g: &Rcg) -> Result<bool, OracleError> {
    guard("reachability", g.n(), 8)?;
    let n = g.n();
    let reach = transitive_closure(g);
    let pairwise = (0..n).all(|i| (0..n).all(|j| reach[i][j] || reach[j][i]));
    let ordered = any_permutation(n, |p| p.windows(2).all(|w| reach[w[0]][w[1]]));
    Ok(pairwise && ordered)
}

/// Vertices reachable from `v` within `hops` steps, by explicit BFS layers.
pub fn reachable_within(g: &Rcg, v: usize, hops: usize) -> Vec<bool> {
    let n = g.n();
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut frontier = vec![v];
    for _ in 0..hops {
        let mut next = Vec::new();
        for &u in &frontier {
            for w in 0..n {
                if g.has_edge(u, w) && !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TournamentFactsReport {
    pub n: usize,
    pub tournaments: u64,
    /// Tournaments with a Hamiltonian path (permutation search).
    pub with_spanning_path: u64,
    /// Tournaments with a two-hop king (BFS).
    pub with_king: u64,
    /// Tournaments where `tournament_spanning_path` returned a valid path.
    pub module_paths_valid: u64,
    /// Tournaments where `find_king` returned a two-hop king.
    pub module_kings_valid: u64,
    /// Orientation codes of tournaments failing any check.
    pub failures: Vec<u64>,
}

impl TournamentFactsReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
            && [
                self.with_spanning_path,
                self.with_king,
                self.module_paths_valid,
                self.module_kings_valid,
            ]
            .iter()
            .all(|&c| c == self.tournaments)
    }
}

/// Exhaustive check of both tournament facts over all `2^(n(n-1)/2)`
/// tournaments, and of the graph module's answers against them.
pub fn tournament_facts_oracle(n: usize) -> Result<TournamentFactsReport, OracleError> {
    guard("tournament-facts", n, 5)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut report = TournamentFactsReport {
        n,
        tournaments: 0,
        with_spanning_path: 0,
        with_king: 0,
        module_paths_valid: 0,
        module_kings_valid: 0,
        failures: Vec::new(),
    };
    for code in 0..1u64 << pairs.len() {
        let g = Rcg::from_edges(
            n,
            pairs.iter().enumerate().map(|(b, &(i, j))| {
                if code >> b & 1 == 0 {
                    (i, j)
                } else {
                    (j, i)
                }
            }),
        )
        .expect("oracle builds valid graphs");
        report.tournaments += 1;

        let has_path = any_permutation(n, |p| p.windows(2).all(|w| g.has_edge(w[0], w[1])));
        let has_king = (0..n).any(|v| reachable_within(&g, v, 2).iter().all(|&r| r));

        let t = Tournament::from_rcg(&g).expect("oracle builds tournaments");
        let path = tournament_spanning_path(&t);
        let mut sorted = path.clone();
        sorted.sort_unstable();
        let path_ok = sorted == (0..n).collect::<Vec<_>>()
            && path.windows(2).all(|w| g.has_edge(w[0], w[1]));
        let king_ok = reachable_within(&g, find_king(&t), 2).iter().all(|&r| r);

        report.with_spanning_path += has_path as u64;
        report.with_king += has_king as u64;
        report.module_paths_valid += path_ok as u64;
        report.module_kings_valid += king_ok as u64;
        if !(has_path && has_king && path_ok && king_ok) {
            report.failures.push(code);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KingLivenessReport {
    pub n: usize,
    pub max_depth: usize,
    /// Smallest depth at which every execution has had a king round.
    pub l_star: Option<usize>,
    /// Per depth `d >= 1`: executions of length `d` without any king round.
    pub kingless_executions: Vec<u128>,
    /// Per depth: distinct global knowledge states among those executions.
    pub kingless_states: Vec<usize>,
}

/// Searches TP-complete executions for the first round in which some
/// processor certifies its first write.
///
/// Models only first-write knowledge: `know[i]` is the set of writers whose
/// first write processor `i` holds. In a round, `i` is king when every
/// processor it hears from already held `i`'s write at the start of the
/// round. Executions are merged by global state, with multiplicities kept
/// so the per-depth counts are exact branch counts.
pub fn king_liveness_search(n: usize, max_depth: usize) -> Result<KingLivenessReport, OracleError> {
    guard("king-liveness", n, 4)?;
    if max_depth > 16 {
        return Err(OracleError::DepthGuard {
            what: "king-liveness",
            depth: max_depth,
            max: 16,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    // Every TP-complete round: per pair, i->j, j->i, or both.
    let mut rounds: Vec<Vec<Vec<bool>>> = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut hears = vec![vec![false; n]; n]; // hears[receiver][sender]
        for &(i, j) in &pairs {
            let c = code % 3;
            code /= 3;
            if c != 1 {
                hears[j][i] = true;
            }
            if c != 0 {
                hears[i][j] = true;
            }
        }
        rounds.push(hears);
    }

    let initial: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    let mut frontier: BTreeMap<Vec<u64>, u128> = BTreeMap::from([(initial, 1)]);
    let mut report = KingLivenessReport {
        n,
        max_depth,
        l_star: None,
        kingless_executions: Vec::new(),
        kingless_states: Vec::new(),
    };
    for depth in 1..=max_depth {
        let mut next: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        for (know, mult) in &frontier {
            for hears in &rounds {
                let king = (0..n).any(|i| {
                    (0..n).all(|j| !hears[i][j] || know[j] >> i & 1 == 1)
                });
                if king {
                    continue;
                }
                let after: Vec<u64> = (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| hears[i][j])
                            .fold(know[i], |acc, j| acc | know[j])
                    })
                    .collect();
                *next.entry(after).or_insert(0) += mult;
            }
        }
        report
            .kingless_executions
            .push(next.values().sum());
        report.kingless_states.push(next.len());
        if next.is_empty() {
            report.l_star = Some(depth);
            break;
        }
        frontier = next;
    }
    Ok(report)
}
