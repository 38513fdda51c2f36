use std::collections::BTreeSet;

use proptest::prelude::*;
use scimap_core::ingest::CitationMatrix;
use scimap_core::similarity::{
    cosine_similarity, cosine_similarity_with, pearson_similarity, pearson_similarity_with,
    threshold_graph, threshold_graph_with, DiagonalPolicy, SimilarityMatrix,
};
use scimap_core::Execution;

fn rows(n: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![3 => Just(0u64), 2 => 1u64..30], n),
        n,
    )
}

fn to_matrix(rows: &[Vec<u64>]) -> CitationMatrix {
    let n = rows.len();
    let entries = (0..n).flat_map(|i| {
        (0..n)
            .filter(move |&j| rows[i][j] > 0)
            .map(move |j| (i, j, rows[i][j]))
    });
    CitationMatrix::from_entries(
        (0..n).map(|i| format!("J{i}")).collect(),
        entries.collect::<Vec<_>>(),
    )
    .unwrap()
}

fn policy() -> impl Strategy<Value = DiagonalPolicy> {
    prop_oneof![
        Just(DiagonalPolicy::Include),
        Just(DiagonalPolicy::ExcludePair)
    ]
}

fn same_bits(a: &SimilarityMatrix, b: &SimilarityMatrix) -> bool {
    let bits = |s: &SimilarityMatrix| {
        s.packed_values()
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    bits(a) == bits(b) && a.packed_defined() == b.packed_defined()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric(r in rows(9), p in policy()) {
        let s = pearson_similarity(&to_matrix(&r), p);
        for i in 0..9 {
            for j in 0..9 {
                prop_assert_eq!(s.get(i, j).map(f64::to_bits), s.get(j, i).map(f64::to_bits));
            }
        }
    }

    #[test]
    fn pearson_is_scale_invariant(r in rows(10), who in 0usize..10, k in 2u64..9, t in 0.0f64..1.0, p in policy()) {
        let mut scaled = r.clone();
        scaled[who].iter_mut().for_each(|c| *c *= k);
        let (a, b) = (pearson_similarity(&to_matrix(&r), p), pearson_similarity(&to_matrix(&scaled), p));
        for j in 0..10 {
            match (a.get(who, j), b.get(who, j)) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}"),
                (x, y) => prop_assert_eq!(x.is_some(), y.is_some()),
            }
        }
        // Edges away from the cutoff are unaffected by rounding.
        let near = |s: &SimilarityMatrix| (0..10).any(|j| j != who && s.get(who, j).is_some_and(|v| (v - t).abs() < 1e-9));
        if !near(&a) {
            let edges = |s| threshold_graph(s, t).edges().map(|(u, v, _)| (u, v)).collect::<Vec<_>>();
            prop_assert_eq!(edges(&a), edges(&b));
        }
    }

    /// Pearson equals the cosine of the mean-centered rows.
    #[test]
    fn pearson_is_cosine_of_centered_rows(r in rows(8)) {
        let s = pearson_similarity(&to_matrix(&r), DiagonalPolicy::Include);
        let c = cosine_similarity(&to_matrix(&r), DiagonalPolicy::Include);
        let center = |x: &[u64]| {
            let m = x.iter().sum::<u64>() as f64 / x.len() as f64;
            x.iter().map(|&v| v as f64 - m).collect::<Vec<f64>>()
        };
        let cosine = |x: &[f64], y: &[f64]| {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            let (nx, ny) = (x.iter().map(|a| a * a).sum::<f64>().sqrt(), y.iter().map(|a| a * a).sum::<f64>().sqrt());
            (nx > 0.0 && ny > 0.0).then(|| dot / (nx * ny))
        };
        for i in 0..8 {
            for j in i + 1..8 {
                let want = cosine(&center(&r[i]), &center(&r[j]));
                match (s.get(i, j), want) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12),
                    (x, y) => prop_assert_eq!(x.is_some(), y.is_some()),
                }
                let raw: Vec<f64> = r[i].iter().map(|&v| v as f64).collect();
                let raw2: Vec<f64> = r[j].iter().map(|&v| v as f64).collect();
                let want = cosine(&raw, &raw2).unwrap_or(0.0);
                prop_assert!((c.get(i, j).unwrap() - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn identical_across_execution_modes(r in rows(12), p in policy(), t in -1.0f64..1.0) {
        let m = to_matrix(&r);
        let a = pearson_similarity_with(&m, p, Execution::Sequential);
        let b = pearson_similarity_with(&m, p, Execution::default());
        prop_assert!(same_bits(&a, &b));
        prop_assert!(same_bits(&cosine_similarity_with(&m, p, Execution::Sequential), &cosine_similarity_with(&m, p, Execution::default())));
        prop_assert_eq!(threshold_graph_with(&a, t, Execution::Sequential), threshold_graph_with(&a, t, Execution::default()));
    }

    #[test]
    fn thresholds_nest(r in rows(12), r1 in -1.0f64..1.0, dr in 0.0f64..1.0) {
        let s = pearson_similarity(&to_matrix(&r), DiagonalPolicy::Include);
        let e = |t| threshold_graph(&s, t).edges().map(|(u, v, _)| (u, v)).collect::<BTreeSet<_>>();
        prop_assert!(e(r1 + dr).is_subset(&e(r1)));
    }
}
