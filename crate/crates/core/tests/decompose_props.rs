use std::collections::BTreeSet;

use proptest::prelude::*;
use scimap_core::decompose::{
    classify, decompose, decompose_within, ClusterTree, DecomposeParams, NodeStatus, Split,
};
use scimap_core::similarity::{Measure, SimilarityMatrix};

/// Planted groups with noisy within-group similarity.
fn planted() -> impl Strategy<Value = SimilarityMatrix> {
    (prop::collection::vec(3usize..14, 1..5), any::<u64>()).prop_map(|(sizes, seed)| {
        let group: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
            .collect();
        let n = group.len();
        let mut state = seed | 1;
        let mut noise = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut vals = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = if group[i] == group[j] {
                    0.75 + 0.25 * noise()
                } else if group[i] / 2 == group[j] / 2 {
                    0.6 + 0.3 * noise()
                } else {
                    noise() * 0.5
                };
                vals[i][j] = v;
                vals[j][i] = v;
            }
        }
        SimilarityMatrix::from_fn(
            (0..n).map(|i| format!("J{i:03}")).collect(),
            Measure::Pearson,
            |i, j| Some(vals[i][j]),
        )
    })
}

fn params() -> impl Strategy<Value = DecomposeParams> {
    (3usize..6, 4usize..20).prop_map(|(min_size, max)| DecomposeParams {
        ladder: vec![0.7, 0.85, 0.95],
        min_size,
        max_component_size: max,
    })
}

fn check_split(parent: &[usize], s: &Split) -> Result<(), TestCaseError> {
    let parent_set: BTreeSet<usize> = parent.iter().copied().collect();
    let mut union = BTreeSet::new();
    let mut total = 0;
    for c in &s.children {
        prop_assert!(
            c.vertices.iter().all(|v| parent_set.contains(v)),
            "child escapes its parent"
        );
        total += c.vertices.len();
        union.extend(c.vertices.iter().copied());
        if let Some(sub) = &c.split {
            prop_assert_eq!(c.status, NodeStatus::Split);
            check_split(&c.vertices, sub)?;
        }
    }
    // Conservation with each journal counted once.
    prop_assert_eq!(
        parent.len(),
        union.len() + s.dropped.len() + s.unclustered.len()
    );
    // Siblings overlap only in articulation points; the plain sum over-counts by exactly their extra memberships.
    let extra: usize = s
        .articulation_points
        .iter()
        .map(|v| {
            s.children
                .iter()
                .filter(|c| c.vertices.binary_search(v).is_ok())
                .count()
                - 1
        })
        .sum();
    prop_assert_eq!(total, union.len() + extra);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn refinement_and_conservation(s in planted(), p in params()) {
        let tree = decompose(&s, &p).unwrap();
        check_split(&(0..s.n()).collect::<Vec<_>>(), &tree.top)?;
    }

    #[test]
    fn classification_is_stable(s in planted(), p in params()) {
        let a = classify(&decompose(&s, &p).unwrap()).to_csv();
        let b = classify(&decompose(&s, &p).unwrap()).to_csv();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ladder_steps_compose(s in planted(), p in params()) {
        let two = DecomposeParams { ladder: vec![0.7, 0.85], ..p.clone() };
        let one = DecomposeParams { ladder: vec![0.7], ..p.clone() };
        let (a, b): (ClusterTree, ClusterTree) = (decompose(&s, &two).unwrap(), decompose(&s, &one).unwrap());
        prop_assert_eq!(a.top.children.len(), b.top.children.len());
        for (ca, cb) in a.top.children.iter().zip(&b.top.children) {
            prop_assert_eq!(&ca.vertices, &cb.vertices);
            if cb.status == NodeStatus::LadderExhausted {
                let manual = decompose_within(&s, &cb.vertices, &DecomposeParams { ladder: vec![0.85], ..p.clone() }).unwrap();
                prop_assert_eq!(ca.split.as_deref(), Some(&manual));
            } else {
                prop_assert_eq!(ca.status, cb.status);
            }
        }
    }
}
