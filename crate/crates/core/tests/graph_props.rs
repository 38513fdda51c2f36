use std::collections::BTreeSet;

use proptest::prelude::*;
use scimap_core::graph::{
    articulation_oracle, bicomponents, connected_components, extract_subgraph,
};
use scimap_core::similarity::{threshold_graph, Measure, SimilarityGraph, SimilarityMatrix};

fn graph(max_n: usize) -> impl Strategy<Value = SimilarityGraph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.3), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            SimilarityGraph::from_edges(n, &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_stay_connected_without_any_vertex(g in graph(16)) {
        for c in bicomponents(&g).components {
            for &drop in &c {
                let rest: Vec<usize> = c.iter().copied().filter(|&v| v != drop).collect();
                let sub = extract_subgraph(&g, &rest).unwrap();
                prop_assert_eq!(connected_components(&sub).len(), 1, "{:?} minus {}", c, drop);
            }
        }
    }

    #[test]
    fn every_edge_in_exactly_one_component(g in graph(16)) {
        let d = bicomponents(&g);
        for (u, v, _) in g.edges() {
            let inside = d.components.iter().filter(|c| c.binary_search(&u).is_ok() && c.binary_search(&v).is_ok()).count();
            let pair = d.bigraph_pairs.contains(&[u, v]) as usize;
            prop_assert_eq!(inside + pair, 1, "edge ({}, {})", u, v);
        }
    }

    #[test]
    fn articulation_points_match_deletion_oracle(g in graph(20)) {
        prop_assert_eq!(bicomponents(&g).articulation_points, articulation_oracle(&g));
    }

    #[test]
    fn relabeling_permutes_the_output(g in graph(14), seed in any::<u64>()) {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let edges: Vec<(usize, usize)> = g.edges().map(|(u, v, _)| (perm[u].min(perm[v]), perm[u].max(perm[v]))).collect();
        let h = SimilarityGraph::from_edges(n, &edges).unwrap();
        let (a, b) = (bicomponents(&g), bicomponents(&h));
        let mapped = |sets: &[Vec<usize>]| -> BTreeSet<BTreeSet<usize>> {
            sets.iter().map(|c| c.iter().map(|&v| perm[v]).collect()).collect()
        };
        let plain = |sets: &[Vec<usize>]| -> BTreeSet<BTreeSet<usize>> { sets.iter().map(|c| c.iter().copied().collect()).collect() };
        prop_assert_eq!(mapped(&a.components), plain(&b.components));
        let aps: BTreeSet<usize> = a.articulation_points.iter().map(|&v| perm[v]).collect();
        prop_assert_eq!(aps, b.articulation_points.iter().copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(a.clone(), bicomponents(&g));
    }

    #[test]
    fn components_nest_under_thresholds(vals in prop::collection::vec(-1.0f64..1.0, 105), r1 in 0.0f64..0.8, dr in 0.0f64..0.5) {
        let s = SimilarityMatrix::from_fn((0..15).map(|i| i.to_string()).collect(), Measure::Pearson, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            Some(vals[a * (29 - a) / 2 + b - a - 1])
        });
        let (lo, hi) = (bicomponents(&threshold_graph(&s, r1)), bicomponents(&threshold_graph(&s, r1 + dr)));
        for c in &hi.components {
            let hosts = lo.components.iter().filter(|h| c.iter().all(|v| h.binary_search(v).is_ok())).count();
            prop_assert_eq!(hosts, 1);
        }
        for p in &hi.bigraph_pairs {
            let hosts = lo.components.iter().filter(|h| p.iter().all(|v| h.binary_search(v).is_ok())).count()
                + lo.bigraph_pairs.contains(p) as usize;
            prop_assert_eq!(hosts, 1);
        }
    }
}
