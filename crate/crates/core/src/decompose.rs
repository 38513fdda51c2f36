//! Threshold-ladder decomposition into a hierarchical classification.
//!
//! At the first rung the whole similarity matrix is cut at `ladder[0]` and
//! split into bi-connected components of at least `min_size` journals. Any
//! component larger than `max_component_size` is cut again at the next rung,
//! restricted to its own journals and reusing the same similarity values,
//! until the ladder runs out.
//!
//! Sibling components may share articulation points, so child vertex sets
//! are disjoint except for those shared journals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{bicomponents, filter_components, size_distribution, ComponentStats};
use crate::ingest::JournalId;
use crate::similarity::{threshold_subgraph_with, SimilarityMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("threshold ladder is empty")]
    EmptyLadder,
    #[error("threshold ladder must be strictly ascending ({0} is followed by {1})")]
    NotAscending(f64, f64),
    #[error("threshold {0} outside (-1, 1]")]
    OutOfRange(f64),
    #[error("minimum component size must be at least 3, got {0}")]
    MinSizeTooSmall(usize),
    #[error("level {0} is not a rung of this tree's ladder")]
    UnknownLevel(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeParams {
    pub ladder: Vec<f64>,
    pub min_size: usize,
    pub max_component_size: usize,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self {
            ladder: vec![0.8, 0.9, 0.95],
            min_size: 10,
            max_component_size: 200,
        }
    }
}

impl DecomposeParams {
    pub fn validate(&self) -> Result<(), DecomposeError> {
        if self.ladder.is_empty() {
            return Err(DecomposeError::EmptyLadder);
        }
        for &t in &self.ladder {
            if !(t > -1.0 && t <= 1.0) {
                return Err(DecomposeError::OutOfRange(t));
            }
        }
        if let Some(w) = self.ladder.windows(2).find(|w| w[1] <= w[0]) {
            return Err(DecomposeError::NotAscending(w[0], w[1]));
        }
        if self.min_size < 3 {
            return Err(DecomposeError::MinSizeTooSmall(self.min_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    /// Small enough to keep.
    Leaf,
    /// Re-cut at the next rung; see [`ClusterNode::split`].
    Split,
    /// Larger than the size cap but no rung left.
    LadderExhausted,
}

/// Result of cutting one vertex set at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub threshold: f64,
    /// Statistics over all bi-connected components of size ≥ 3.
    pub stats: ComponentStats,
    /// Journals shared by two or more retained components, ascending.
    pub articulation_points: Vec<usize>,
    /// Journals left without any edge at this threshold.
    pub dropped: Vec<usize>,
    /// Journals with edges but in no retained component.
    pub unclustered: Vec<usize>,
    pub unclustered_tag: String,
    /// Retained components, largest first.
    pub children: Vec<ClusterNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    /// Threshold at which this component was identified.
    pub threshold: f64,
    /// Member journals (indices into the similarity matrix), ascending.
    pub vertices: Vec<usize>,
    pub status: NodeStatus,
    pub split: Option<Box<Split>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub labels: Vec<String>,
    pub params: DecomposeParams,
    pub top: Split,
}

impl ClusterTree {
    /// Every split in the tree, depth first, the top split included.
    pub fn splits(&self) -> Vec<&Split> {
        fn walk<'a>(s: &'a Split, out: &mut Vec<&'a Split>) {
            out.push(s);
            for c in &s.children {
                if let Some(sp) = &c.split {
                    walk(sp, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.top, &mut out);
        out
    }

    /// Every node, depth first, with its dotted path.
    pub fn nodes(&self) -> Vec<(String, &ClusterNode)> {
        fn walk<'a>(prefix: &str, s: &'a Split, out: &mut Vec<(String, &'a ClusterNode)>) {
            for (k, c) in s.children.iter().enumerate() {
                let path = if prefix.is_empty() {
                    format!("{}", k + 1)
                } else {
                    format!("{prefix}.{}", k + 1)
                };
                out.push((path.clone(), c));
                if let Some(sp) = &c.split {
                    walk(&path, sp, out);
                }
            }
        }
        let mut out = Vec::new();
        walk("", &self.top, &mut out);
        out
    }

    /// Top-level cluster number (1-based) of each journal, 0 when it is in
    /// no top-level cluster. Journals shared by several clusters get the
    /// lowest number.
    pub fn top_level_partition(&self) -> Vec<u32> {
        let mut part = vec![0u32; self.labels.len()];
        for (k, c) in self.top.children.iter().enumerate() {
            for &v in &c.vertices {
                if part[v] == 0 {
                    part[v] = k as u32 + 1;
                }
            }
        }
        part
    }
}

fn format_threshold(t: f64) -> String {
    format!("{t}")
}

fn cut(
    s: &SimilarityMatrix,
    vertices: &[usize],
    threshold: f64,
    min_size: usize,
    exec: Execution,
) -> (Split, Vec<Vec<usize>>) {
    let g = threshold_subgraph_with(s, threshold, vertices, exec);
    let all = bicomponents(&g);
    let stats = size_distribution(&filter_components(&all, 3));
    let retained = filter_components(&all, min_size);
    let global = |local: &[usize]| -> Vec<usize> { local.iter().map(|&v| vertices[v]).collect() };

    let mut covered = vec![false; vertices.len()];
    for c in &retained.components {
        for &v in c {
            covered[v] = true;
        }
    }
    let dropped: Vec<usize> = (0..vertices.len())
        .filter(|&v| g.degree(v) == 0)
        .map(|v| vertices[v])
        .collect();
    let unclustered: Vec<usize> = (0..vertices.len())
        .filter(|&v| g.degree(v) > 0 && !covered[v])
        .map(|v| vertices[v])
        .collect();

    let labels = s.labels();
    let mut children: Vec<Vec<usize>> = retained.components.iter().map(|c| global(c)).collect();
    let min_label = |c: &[usize]| c.iter().map(|&v| labels[v].as_str()).min().unwrap_or("");
    children.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| min_label(a).cmp(min_label(b)))
    });

    let split = Split {
        threshold,
        stats,
        articulation_points: global(&retained.articulation_points),
        dropped,
        unclustered,
        unclustered_tag: format!("unclustered-at-{}", format_threshold(threshold)),
        children: Vec::new(),
    };
    (split, children)
}

fn decompose_rungs(
    s: &SimilarityMatrix,
    vertices: &[usize],
    ladder: &[f64],
    params: &DecomposeParams,
    exec: Execution,
) -> Split {
    let threshold = ladder[0];
    let (mut split, children) = cut(s, vertices, threshold, params.min_size, exec);
    let rest = &ladder[1..];
    split.children = exec.map_slice(&children, |members| {
        let (status, sub) = if members.len() <= params.max_component_size {
            (NodeStatus::Leaf, None)
        } else if rest.is_empty() {
            (NodeStatus::LadderExhausted, None)
        } else {
            (
                NodeStatus::Split,
                Some(Box::new(decompose_rungs(s, members, rest, params, exec))),
            )
        };
        ClusterNode {
            threshold,
            vertices: members.clone(),
            status,
            split: sub,
        }
    });
    split
}

/// Decompose the journals in `vertices` (ascending) along `params.ladder`.
pub fn decompose_within(
    s: &SimilarityMatrix,
    vertices: &[usize],
    params: &DecomposeParams,
) -> Result<Split, DecomposeError> {
    decompose_within_with(s, vertices, params, Execution::default())
}

pub fn decompose_within_with(
    s: &SimilarityMatrix,
    vertices: &[usize],
    params: &DecomposeParams,
    exec: Execution,
) -> Result<Split, DecomposeError> {
    params.validate()?;
    Ok(decompose_rungs(s, vertices, &params.ladder, params, exec))
}

pub fn decompose(
    s: &SimilarityMatrix,
    params: &DecomposeParams,
) -> Result<ClusterTree, DecomposeError> {
    decompose_with(s, params, Execution::default())
}

pub fn decompose_with(
    s: &SimilarityMatrix,
    params: &DecomposeParams,
    exec: Execution,
) -> Result<ClusterTree, DecomposeError> {
    let all: Vec<usize> = (0..s.n()).collect();
    let top = decompose_within_with(s, &all, params, exec)?;
    Ok(ClusterTree {
        labels: s.labels().to_vec(),
        params: params.clone(),
        top,
    })
}

/// Articulation points among the retained components at `level`, over every
/// split cut at that threshold, sorted by label.
pub fn articulation_report(
    tree: &ClusterTree,
    level: f64,
) -> Result<Vec<JournalId>, DecomposeError> {
    const EPS: f64 = 1e-12;
    if !tree.params.ladder.iter().any(|&t| (t - level).abs() <= EPS) {
        return Err(DecomposeError::UnknownLevel(level));
    }
    let mut ids: Vec<usize> = tree
        .splits()
        .into_iter()
        .filter(|s| (s.threshold - level).abs() <= EPS)
        .flat_map(|s| s.articulation_points.iter().copied())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let mut out: Vec<JournalId> = ids
        .into_iter()
        .map(|v| JournalId {
            index: v,
            label: tree.labels[v].clone(),
        })
        .collect();
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub path: String,
    pub journal: String,
    pub threshold: f64,
    pub component_size: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Classification {
    pub rows: Vec<ClassificationRow>,
}

impl Classification {
    /// CSV with header `path,journal,threshold,component_size`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["path", "journal", "threshold", "component_size"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.path.as_str(),
                r.journal.as_str(),
                &format_threshold(r.threshold),
                &r.component_size.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
    }
}

/// One row per journal and deepest node containing it. Nodes are numbered
/// depth first (`k`, `k.1`, `k.2`, ...) in the tree's child order; a split
/// node keeps the journals that fell out of all of its children.
pub fn classify(tree: &ClusterTree) -> Classification {
    fn visit(
        tree: &ClusterTree,
        path: &str,
        node: &ClusterNode,
        rows: &mut Vec<ClassificationRow>,
    ) {
        let mut own: Vec<usize> = match &node.split {
            None => node.vertices.clone(),
            Some(sp) => sp.dropped.iter().chain(&sp.unclustered).copied().collect(),
        };
        own.sort_by(|&a, &b| tree.labels[a].cmp(&tree.labels[b]));
        rows.extend(own.into_iter().map(|v| ClassificationRow {
            path: path.to_string(),
            journal: tree.labels[v].clone(),
            threshold: node.threshold,
            component_size: node.vertices.len(),
        }));
        if let Some(sp) = &node.split {
            for (k, c) in sp.children.iter().enumerate() {
                visit(tree, &format!("{path}.{}", k + 1), c, rows);
            }
        }
    }
    let mut rows = Vec::new();
    for (k, c) in tree.top.children.iter().enumerate() {
        visit(tree, &(k + 1).to_string(), c, &mut rows);
    }
    Classification { rows }
}

/// Human-readable per-rung summary in the style of a three-row table.
pub fn describe_split(s: &Split) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "threshold {}", format_threshold(s.threshold));
    let _ = writeln!(
        out,
        "  components (size >= 3)   {:>8}",
        s.stats.n_components
    );
    let _ = writeln!(
        out,
        "  journals included        {:>8}",
        s.stats.n_journals_covered
    );
    let _ = writeln!(
        out,
        "  articulation points      {:>8}",
        s.stats.n_articulation_points
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::Measure;

    /// Similarity with given clusters: pairs inside a group get `r`, the rest 0.
    fn blocks(n: usize, groups: &[(&[usize], f64)]) -> SimilarityMatrix {
        let labels = (0..n).map(|i| format!("J{i:03}")).collect();
        SimilarityMatrix::from_fn(labels, Measure::Pearson, |i, j| {
            let mut best: f64 = 0.0;
            for (g, r) in groups {
                if g.contains(&i) && g.contains(&j) {
                    best = best.max(*r);
                }
            }
            Some(best)
        })
    }

    #[test]
    fn rejects_bad_ladders() {
        let s = blocks(3, &[]);
        let p = |ladder: Vec<f64>| DecomposeParams {
            ladder,
            min_size: 3,
            max_component_size: 10,
        };
        assert_eq!(
            decompose(&s, &p(vec![])).unwrap_err(),
            DecomposeError::EmptyLadder
        );
        assert_eq!(
            decompose(&s, &p(vec![0.9, 0.8])).unwrap_err(),
            DecomposeError::NotAscending(0.9, 0.8)
        );
        assert_eq!(
            decompose(&s, &p(vec![0.8, 0.8])).unwrap_err(),
            DecomposeError::NotAscending(0.8, 0.8)
        );
        assert_eq!(
            decompose(&s, &p(vec![-1.0])).unwrap_err(),
            DecomposeError::OutOfRange(-1.0)
        );
        let bad = DecomposeParams {
            ladder: vec![0.8],
            min_size: 2,
            max_component_size: 10,
        };
        assert_eq!(
            decompose(&s, &bad).unwrap_err(),
            DecomposeError::MinSizeTooSmall(2)
        );
    }

    #[test]
    fn small_components_do_not_recurse() {
        let g1: Vec<usize> = (0..4).collect();
        let g2: Vec<usize> = (4..9).collect();
        let s = blocks(10, &[(&g1, 0.85), (&g2, 0.9)]);
        let params = DecomposeParams {
            ladder: vec![0.8, 0.9],
            min_size: 3,
            max_component_size: 20,
        };
        let t = decompose(&s, &params).unwrap();
        assert_eq!(t.top.children.len(), 2);
        assert!(t.top.children.iter().all(|c| c.status == NodeStatus::Leaf));
        assert_eq!(t.top.children[0].vertices, g2, "largest first");
        assert_eq!(t.top.dropped, vec![9]);
    }

    #[test]
    fn oversized_component_is_recut() {
        // 12 journals related at 0.85; two inner groups hold at 0.95.
        let all: Vec<usize> = (0..12).collect();
        let a: Vec<usize> = (0..5).collect();
        let b: Vec<usize> = (5..9).collect();
        let s = blocks(12, &[(&all, 0.85), (&a, 0.95), (&b, 0.96)]);
        let params = DecomposeParams {
            ladder: vec![0.8, 0.9],
            min_size: 3,
            max_component_size: 6,
        };
        let t = decompose(&s, &params).unwrap();
        let root = &t.top.children[0];
        assert_eq!(root.status, NodeStatus::Split);
        let sp = root.split.as_ref().unwrap();
        assert_eq!(sp.threshold, 0.9);
        assert_eq!(sp.children.len(), 2);
        assert_eq!(sp.children[0].vertices, a);
        assert_eq!(sp.children[1].vertices, b);
        assert_eq!(sp.dropped, vec![9, 10, 11]);

        let c = classify(&t);
        let paths: Vec<_> = c
            .rows
            .iter()
            .map(|r| (r.path.as_str(), r.journal.as_str()))
            .collect();
        assert_eq!(paths[0], ("1", "J009"));
        assert_eq!(paths[3], ("1.1", "J000"));
        assert_eq!(paths.last().unwrap(), &("1.2", "J008"));
        assert_eq!(c.rows.len(), 12);
    }

    #[test]
    fn ladder_exhaustion_is_flagged() {
        let all: Vec<usize> = (0..8).collect();
        let s = blocks(8, &[(&all, 0.9)]);
        let params = DecomposeParams {
            ladder: vec![0.8],
            min_size: 3,
            max_component_size: 4,
        };
        let t = decompose(&s, &params).unwrap();
        assert_eq!(t.top.children[0].status, NodeStatus::LadderExhausted);
    }

    #[test]
    fn single_component_classification() {
        let g: Vec<usize> = (0..3).collect();
        let s = blocks(3, &[(&g, 0.9)]);
        let params = DecomposeParams {
            ladder: vec![0.8],
            min_size: 3,
            max_component_size: 200,
        };
        let t = decompose(&s, &params).unwrap();
        let csv = classify(&t).to_csv();
        assert_eq!(
            csv,
            "path,journal,threshold,component_size\n1,J000,0.8,3\n1,J001,0.8,3\n1,J002,0.8,3\n"
        );
        assert!(articulation_report(&t, 0.8).unwrap().is_empty());
        assert_eq!(
            articulation_report(&t, 0.5),
            Err(DecomposeError::UnknownLevel(0.5))
        );
    }

    #[test]
    fn butterfly_articulation_report() {
        let s = blocks(5, &[(&[0, 1, 2], 0.9), (&[2, 3, 4], 0.9)]);
        let params = DecomposeParams {
            ladder: vec![0.8],
            min_size: 3,
            max_component_size: 200,
        };
        let t = decompose(&s, &params).unwrap();
        let rep = articulation_report(&t, 0.8).unwrap();
        assert_eq!(
            rep,
            vec![JournalId {
                index: 2,
                label: "J002".into()
            }]
        );
        // The shared journal is classified under both clusters.
        let c = classify(&t);
        assert_eq!(c.rows.iter().filter(|r| r.journal == "J002").count(), 2);
    }

    #[test]
    fn empty_tree_classifies_to_nothing() {
        let s = blocks(4, &[]);
        let t = decompose(&s, &DecomposeParams::default()).unwrap();
        assert!(classify(&t).rows.is_empty());
        assert_eq!(t.top.dropped.len(), 4);
    }
}
