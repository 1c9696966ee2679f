use adversim_core::graph::{
    contains_tournament, find_king, has_traversal_path, scc_condensation, tournament_spanning_path,
};
use adversim_core::oracle::{reachability_pair_oracle, reachable_within, transitive_closure};
use adversim_core::{Rcg, Tournament};
use proptest::prelude::*;

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect()
}

fn digraph_from_code(n: usize, code: u64) -> Rcg {
    let edges = ordered_pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(k, _)| code >> k & 1 == 1)
        .map(|(_, e)| e);
    Rcg::from_edges(n, edges).unwrap()
}

fn path_is_spanning(t: &Tournament, path: &[usize]) -> bool {
    let mut seen = vec![false; t.n()];
    for &v in path {
        if std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    path.len() == t.n() && path.windows(2).all(|w| t.beats(w[0], w[1]))
}

fn king_is_valid(t: &Tournament) -> bool {
    reachable_within(t.as_rcg(), find_king(t), 2).iter().all(|&r| r)
}

#[test]
fn traversal_path_matches_oracle_on_all_small_digraphs() {
    for n in 1..=4 {
        let m = n * (n - 1);
        for code in 0..1u64 << m {
            let g = digraph_from_code(n, code);
            let module = has_traversal_path(&g);
            assert_eq!(module, reachability_pair_oracle(&g).unwrap(), "{g:?}");
            if contains_tournament(&g) {
                assert!(module, "tournament without spanning walk: {g:?}");
            }
        }
    }
}

#[test]
fn every_tournament_up_to_six_has_path_and_king() {
    for n in 1..=6 {
        for t in Tournament::all(n) {
            assert!(path_is_spanning(&t, &tournament_spanning_path(&t)), "{t:?}");
            assert!(king_is_valid(&t), "{t:?}");
        }
    }
}

fn tournament() -> impl Strategy<Value = Tournament> {
    (1usize..=12).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut it = bits.into_iter();
            Tournament::from_fn(n, |_, _| it.next().unwrap()).unwrap()
        })
    })
}

fn digraph() -> impl Strategy<Value = Rcg> {
    (1usize..=9).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1)).prop_map(move |bits| {
            let edges = ordered_pairs(n).into_iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| e);
            Rcg::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn random_tournament_path_and_king(t in tournament()) {
        prop_assert!(path_is_spanning(&t, &tournament_spanning_path(&t)));
        prop_assert!(king_is_valid(&t));
    }

    #[test]
    fn components_are_mutual_reachability_classes(g in digraph()) {
        let c = scc_condensation(&g);
        let reach = transitive_closure(&g);
        for a in 0..g.n() {
            prop_assert!(c.members[c.component[a]].contains(a));
            for b in 0..g.n() {
                let mutual = a == b || (reach[a][b] && reach[b][a]);
                prop_assert_eq!(c.component[a] == c.component[b], mutual);
            }
        }
        let order = c.topological_order();
        let rank: Vec<usize> = {
            let mut r = vec![0; c.len()];
            for (k, &comp) in order.iter().enumerate() {
                r[comp] = k;
            }
            r
        };
        for (a, out) in c.dag.iter().enumerate() {
            for b in out.iter() {
                prop_assert!(rank[a] < rank[b]);
            }
        }
    }
}
