//! The TP-pairs protocol complex as an explicit chromatic subdivision.
//!
//! Vertices are (processor, view) pairs identified by the same digests the
//! engine computes for full-information views, so a complex built here can
//! be compared against engine runs by digest equality alone. Each vertex
//! also carries its exact barycentric position in the original simplex,
//! scaled by `3^k`.

mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversaryError, AdversarySpec, Pair, PairSchedule};
use crate::digest::{Digest, StateDigest};
use crate::engine::{extend_digest, for_each_execution, initial_digest, EngineError, ExhaustiveLimits, FullInformation};
use crate::procset::ProcSet;

pub use export::ExportFormat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("top simplex {top:?} does not have exactly one vertex of each color in {pair}")]
    Malformed { top: Vec<usize>, pair: Pair },
    #[error("pair {pair} is out of range for n = {n}")]
    PairOutOfRange { pair: Pair, n: usize },
    #[error("svg2d export needs n = 3, got n = {n}")]
    UnsupportedDimension { n: usize },
    #[error("invalid complex: {0}")]
    Invalid(String),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub color: usize,
    pub carrier: ProcSet,
    pub digest: Digest,
    /// Barycentric coordinates times `3^k`.
    pub position: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimComplex {
    pub n: usize,
    /// Number of splits applied.
    pub k: usize,
    /// Pair split in each round so far.
    pub schedule: Vec<Pair>,
    /// Indexed by id.
    pub vertices: Vec<Vertex>,
    /// Sorted vertex ids, one entry per top simplex, in sorted order.
    pub tops: Vec<Vec<usize>>,
}

/// The original simplex: vertex `i` is processor `i` in its initial view.
pub fn initial_complex(n: usize, inputs: &[u64]) -> SimComplex {
    assert!(n >= 1 && inputs.len() == n, "one input per processor");
    let vertices = (0..n)
        .map(|i| {
            let mut position = vec![0; n];
            position[i] = 1;
            Vertex {
                id: i,
                color: i,
                carrier: ProcSet::singleton(i),
                digest: initial_digest(i, inputs[i]),
                position,
            }
        })
        .collect();
    SimComplex {
        n,
        k: 0,
        schedule: Vec::new(),
        vertices,
        tops: vec![(0..n).collect()],
    }
}

impl SimComplex {
    pub fn scale(&self) -> u64 {
        3u64.pow(self.k as u32)
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    /// Undirected 1-skeleton edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for top in &self.tops {
            for (x, &a) in top.iter().enumerate() {
                for &b in &top[x + 1..] {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    /// Per top simplex, its vertex digests indexed by color.
    pub fn top_states(&self) -> Vec<Vec<Digest>> {
        self.tops
            .iter()
            .map(|top| {
                let mut by_color = vec![None; self.n];
                for &v in top {
                    by_color[self.vertices[v].color] = Some(self.vertices[v].digest);
                }
                by_color.into_iter().map(|d| d.expect("chromatic top")).collect()
            })
            .collect()
    }
}

/// One round of TP-pairs on `pair`: every edge colored by the pair becomes
/// a three-edge alternating path and every top simplex three.
///
/// Old vertices keep their ids and move to the view "heard nothing this
/// round". On the edge `x y` (`x` colored `pair.low()`), the new vertex
/// `z1` is `y`'s color having heard `x`, and `z2` is `x`'s color having
/// heard `y`; their positions are at one and two thirds along the edge.
pub fn xy_split_round(c: &SimComplex, pair: Pair) -> Result<SimComplex, ComplexError> {
    if pair.high() >= c.n {
        return Err(ComplexError::PairOutOfRange { pair, n: c.n });
    }
    let (ci, cj) = (pair.low(), pair.high());
    let round = c.k + 1;
    let mut vertices: Vec<Vertex> = c
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id,
            color: v.color,
            carrier: v.carrier,
            digest: extend_digest(&v.digest, round, []),
            position: v.position.iter().map(|p| p * 3).collect(),
        })
        .collect();

    let mut splits: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut tops = Vec::with_capacity(c.tops.len() * 3);
    for top in &c.tops {
        let colored = |col: usize| -> Vec<usize> {
            top.iter().copied().filter(|&v| c.vertices[v].color == col).collect()
        };
        let (xs, ys) = (colored(ci), colored(cj));
        let (&[x], &[y]) = (xs.as_slice(), ys.as_slice()) else {
            return Err(ComplexError::Malformed {
                top: top.clone(),
                pair,
            });
        };
        let (z1, z2) = *splits.entry((x, y)).or_insert_with(|| {
            let (vx, vy) = (&c.vertices[x], &c.vertices[y]);
            let carrier = vx.carrier.union(vy.carrier);
            let at = |wx: u64, wy: u64| -> Vec<u64> {
                vx.position
                    .iter()
                    .zip(&vy.position)
                    .map(|(a, b)| wx * a + wy * b)
                    .collect()
            };
            let z1 = Vertex {
                id: vertices.len(),
                color: cj,
                carrier,
                digest: extend_digest(&vy.digest, round, [(ci, vx.digest)]),
                position: at(2, 1),
            };
            let z2 = Vertex {
                id: vertices.len() + 1,
                color: ci,
                carrier,
                digest: extend_digest(&vx.digest, round, [(cj, vy.digest)]),
                position: at(1, 2),
            };
            let ids = (z1.id, z2.id);
            vertices.push(z1);
            vertices.push(z2);
            ids
        });
        let rest: Vec<usize> = top.iter().copied().filter(|&v| v != x && v != y).collect();
        for (a, b) in [(x, z1), (z1, z2), (z2, y)] {
            let mut t = rest.clone();
            t.push(a);
            t.push(b);
            t.sort_unstable();
            tops.push(t);
        }
    }
    tops.sort();
    let mut schedule = c.schedule.clone();
    schedule.push(pair);
    Ok(SimComplex {
        n: c.n,
        k: round,
        schedule,
        vertices,
        tops,
    })
}

/// Applies the first `k` rounds of `schedule` to the initial complex.
pub fn build(n: usize, schedule: &PairSchedule, k: usize, inputs: &[u64]) -> Result<SimComplex, ComplexError> {
    let mut c = initial_complex(n, inputs);
    for round in 0..k {
        c = xy_split_round(&c, schedule.pair_for_round(round))?;
    }
    Ok(c)
}

/// Every top simplex has `n` vertices of pairwise distinct colors.
pub fn check_chromatic(c: &SimComplex) -> bool {
    c.tops.iter().all(|top| {
        let colors: ProcSet = top.iter().map(|&v| c.vertices[v].color).collect();
        top.len() == c.n && colors == ProcSet::full(c.n)
    })
}

/// Every vertex's color lies in its carrier.
pub fn check_sperner(c: &SimComplex) -> bool {
    c.vertices.iter().all(|v| v.carrier.contains(v.color))
}

/// Every carrier is exactly the support of the vertex's position, and
/// positions sum to the scale.
pub fn check_carriers(c: &SimComplex) -> bool {
    let scale = c.scale();
    c.vertices.iter().all(|v| {
        let support: ProcSet = v
            .position
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, _)| i)
            .collect();
        support == v.carrier && v.position.iter().sum::<u64>() == scale
    })
}

/// The subdivided side between corners `i` and `j`, as a path of vertex
/// ids from corner `i` to corner `j`, if it is a simple path whose colors
/// alternate between `i` and `j`.
pub fn boundary_path(c: &SimComplex, i: usize, j: usize) -> Option<Vec<usize>> {
    let side = ProcSet::singleton(i).with(j);
    let on_side: BTreeSet<usize> = c
        .vertices
        .iter()
        .filter(|v| v.carrier.is_subset(side))
        .map(|v| v.id)
        .collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = on_side.iter().map(|&v| (v, Vec::new())).collect();
    for (a, b) in c.edges() {
        if on_side.contains(&a) && on_side.contains(&b) {
            adj.get_mut(&a)?.push(b);
            adj.get_mut(&b)?.push(a);
        }
    }
    let start = c.vertices.iter().find(|v| v.carrier == ProcSet::singleton(i))?.id;
    let mut path = vec![start];
    let mut prev = None;
    let mut cur = start;
    loop {
        let next: Vec<usize> = adj[&cur].iter().copied().filter(|&x| Some(x) != prev).collect();
        match next.as_slice() {
            [] => break,
            [x] => {
                prev = Some(cur);
                cur = *x;
                path.push(cur);
            }
            _ => return None,
        }
        if path.len() > on_side.len() {
            return None;
        }
    }
    let alternates = path.iter().enumerate().all(|(k, &v)| {
        c.vertices[v].color == if k % 2 == 0 { i } else { j }
    });
    let ends_at_j = c.vertices[cur].carrier == ProcSet::singleton(j);
    (alternates && ends_at_j && path.len() == on_side.len()).then_some(path)
}

/// Mismatch between a complex and the engine's executions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CrossValidation {
    Bijection { executions: u64 },
    CountMismatch { executions: u64, tops: usize },
    /// An execution's final states that form no top simplex.
    UnmatchedExecution { branch: String },
    /// A top simplex no execution realizes.
    UnrealizedTop { top: Vec<usize> },
    /// An edge whose two states no execution realizes together, or the
    /// converse.
    EdgeMismatch { digests: (Digest, Digest) },
}

impl CrossValidation {
    pub fn holds(&self) -> bool {
        matches!(self, CrossValidation::Bijection { .. })
    }
}

/// Runs every full-information execution of `k` TP-pairs rounds over
/// `schedule` and compares final state tuples with the top simplices, and
/// co-realized state pairs with the 1-skeleton.
pub fn cross_validate(
    c: &SimComplex,
    schedule: &PairSchedule,
    k: usize,
    inputs: &[u64],
) -> Result<CrossValidation, ComplexError> {
    let spec = AdversarySpec::tp_pairs(c.n, schedule.clone())?;
    let mut executions: Vec<(String, Vec<Digest>)> = Vec::new();
    let count = for_each_execution(
        &FullInformation::default(),
        &spec,
        k,
        inputs,
        &ExhaustiveLimits::default(),
        |t| {
            let branch = serde_json::to_string(&t.origin).expect("origin serializes");
            executions.push((branch, t.final_states().iter().map(StateDigest::state_digest).collect()));
            ControlFlow::Continue(())
        },
    )?;
    if count as usize != c.tops.len() {
        return Ok(CrossValidation::CountMismatch {
            executions: count,
            tops: c.tops.len(),
        });
    }
    let tops: HashMap<Vec<Digest>, usize> = c
        .top_states()
        .into_iter()
        .enumerate()
        .map(|(t, s)| (s, t))
        .collect();
    let mut realized = vec![false; c.tops.len()];
    for (branch, states) in &executions {
        match tops.get(states) {
            Some(&t) if !realized[t] => realized[t] = true,
            _ => {
                return Ok(CrossValidation::UnmatchedExecution {
                    branch: branch.clone(),
                })
            }
        }
    }
    if let Some(t) = realized.iter().position(|&r| !r) {
        return Ok(CrossValidation::UnrealizedTop {
            top: c.tops[t].clone(),
        });
    }

    let ordered = |a: Digest, b: Digest| if a <= b { (a, b) } else { (b, a) };
    let mut co_realized = BTreeSet::new();
    for (_, states) in &executions {
        for (x, &a) in states.iter().enumerate() {
            for &b in &states[x + 1..] {
                co_realized.insert(ordered(a, b));
            }
        }
    }
    let skeleton: BTreeSet<(Digest, Digest)> = c
        .edges()
        .into_iter()
        .map(|(a, b)| ordered(c.vertices[a].digest, c.vertices[b].digest))
        .collect();
    if let Some(&d) = co_realized.symmetric_difference(&skeleton).next() {
        return Ok(CrossValidation::EdgeMismatch { digests: d });
    }
    Ok(CrossValidation::Bijection { executions: count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn staggered_schedule() -> PairSchedule {
        PairSchedule::parse(3, "1-2,0-1,0-2").unwrap()
    }

    #[test]
    fn initial_shapes() {
        let c = initial_complex(3, &[0, 1, 2]);
        assert_eq!((c.vertices.len(), c.tops.len()), (3, 1));
        assert!(c.vertices.iter().all(|v| v.carrier.len() == 1 && v.carrier.contains(v.color)));
        let one = initial_complex(1, &[0]);
        assert_eq!((one.vertices.len(), one.tops.len()), (1, 1));
        assert!(check_chromatic(&one) && check_sperner(&one));
    }

    #[test]
    fn first_split_of_triangle() {
        let c = xy_split_round(&initial_complex(3, &[0, 1, 2]), Pair::new(1, 2).unwrap()).unwrap();
        assert_eq!((c.vertices.len(), c.tops.len()), (5, 3));
        assert!(c.tops.iter().all(|t| t.contains(&0)));
        let path = boundary_path(&c, 1, 2).unwrap();
        let colors: Vec<usize> = path.iter().map(|&v| c.vertices[v].color).collect();
        assert_eq!(colors, vec![1, 2, 1, 2]);
        assert_eq!(c.vertices[3].position, vec![0, 2, 1]);
    }

    #[test]
    fn edge_split() {
        let c = xy_split_round(&initial_complex(2, &[0, 1]), Pair::new(0, 1).unwrap()).unwrap();
        assert_eq!((c.vertices.len(), c.tops.len()), (4, 3));
    }

    #[test]
    fn growth_and_checks() {
        let c = build(3, &staggered_schedule(), 3, &[0, 1, 2]).unwrap();
        assert_eq!(c.tops.len(), 27);
        assert!(check_chromatic(&c) && check_sperner(&c) && check_carriers(&c));
        let c = build(4, &PairSchedule::round_robin(4).unwrap(), 6, &[0; 4]).unwrap();
        assert_eq!(c.tops.len(), 729);
        assert!(check_chromatic(&c) && check_sperner(&c) && check_carriers(&c));
    }

    #[test]
    fn corrupted_color_breaks_sperner() {
        let mut c = build(3, &staggered_schedule(), 1, &[0, 1, 2]).unwrap();
        c.vertices[3].color = 0;
        assert!(!check_sperner(&c));
        assert!(!check_chromatic(&c));
        assert!(matches!(
            xy_split_round(&c, Pair::new(0, 1).unwrap()),
            Err(ComplexError::Malformed { .. })
        ));
    }

    #[test]
    fn cross_validation_small() {
        let s = PairSchedule::round_robin(2).unwrap();
        let c = build(2, &s, 1, &[0, 1]).unwrap();
        assert_eq!(cross_validate(&c, &s, 1, &[0, 1]).unwrap(), CrossValidation::Bijection { executions: 3 });
        let c = build(3, &staggered_schedule(), 0, &[0, 1, 2]).unwrap();
        assert!(cross_validate(&c, &staggered_schedule(), 0, &[0, 1, 2]).unwrap().holds());
        let c = build(3, &staggered_schedule(), 3, &[0, 1, 2]).unwrap();
        assert_eq!(
            cross_validate(&c, &staggered_schedule(), 3, &[0, 1, 2]).unwrap(),
            CrossValidation::Bijection { executions: 27 }
        );
    }

    #[test]
    fn cross_validation_detects_tampering() {
        let s = staggered_schedule();
        let mut c = build(3, &s, 2, &[0, 1, 2]).unwrap();
        c.vertices[4].digest = Digest::of_json(&"tampered");
        assert!(!cross_validate(&c, &s, 2, &[0, 1, 2]).unwrap().holds());
    }
}
