use std::collections::BTreeSet;

use proptest::prelude::*;
use scimap_core::ingest::{
    apply_citation_threshold, filter_low_activity, matrix_stats, parse_citation_csv,
    write_citation_csv, CitationMatrix,
};

/// Matrices in which every journal appears in at least one entry.
fn matrix() -> impl Strategy<Value = CitationMatrix> {
    prop::collection::btree_map((0usize..12, 0usize..12), 1u64..60, 1..60).prop_map(|cells| {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        for &(i, j) in cells.keys() {
            for v in [i, j] {
                if seen.insert(v) {
                    order.push(v);
                }
            }
        }
        let index = |v: usize| order.iter().position(|&x| x == v).unwrap();
        let labels = order.iter().map(|v| format!("Journal {v}, vol")).collect();
        let entries: Vec<_> = cells
            .iter()
            .map(|(&(i, j), &c)| (index(i), index(j), c))
            .collect();
        CitationMatrix::from_entries(labels, entries).unwrap()
    })
}

fn entry_set(m: &CitationMatrix) -> BTreeSet<(String, String, u64)> {
    m.entries()
        .map(|(i, j, c)| (m.label(i).to_string(), m.label(j).to_string(), c))
        .collect()
}

proptest! {
    #[test]
    fn csv_round_trip(m in matrix()) {
        let mut buf = Vec::new();
        write_citation_csv(&m, &mut buf).unwrap();
        prop_assert_eq!(parse_citation_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn threshold_idempotent_and_monotone(m in matrix(), t1 in 1u64..40, dt in 0u64..40) {
        let a = apply_citation_threshold(&m, t1);
        prop_assert_eq!(apply_citation_threshold(&a, t1), a.clone());
        let b = apply_citation_threshold(&m, t1 + dt);
        prop_assert!(entry_set(&b).is_subset(&entry_set(&a)));
        prop_assert!(a.entries().all(|(_, _, c)| c >= t1));
    }

    #[test]
    fn low_activity_filter_keeps_active_journals(m in matrix(), min in 0u64..200) {
        let (kept, excluded) = filter_low_activity(&m, min);
        let kept_labels: BTreeSet<&str> = kept.labels().iter().map(String::as_str).collect();
        let excluded_labels: BTreeSet<&str> = excluded.iter().map(|j| j.label.as_str()).collect();
        prop_assert!(kept_labels.is_disjoint(&excluded_labels));
        let all: BTreeSet<&str> = m.labels().iter().map(String::as_str).collect();
        prop_assert_eq!(kept_labels.union(&excluded_labels).copied().collect::<BTreeSet<_>>(), all);
        for i in 0..m.n() {
            if m.row_sum(i) >= min {
                prop_assert!(kept_labels.contains(m.label(i)));
            }
        }
    }

    #[test]
    fn stats_count_stored_entries(m in matrix()) {
        let s = matrix_stats(&m);
        prop_assert_eq!(s.nonzero_count, m.entries().count());
        prop_assert_eq!(s.n, m.n());
    }
}

#[test]
fn writer_rejects_isolated_journals() {
    let m = CitationMatrix::from_entries(vec!["A".into(), "B".into()], vec![(0, 0, 1)]).unwrap();
    assert!(write_citation_csv(&m, Vec::new()).is_err());
}
