//! Connectivity, bi-connected components and articulation points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CitationMatrix;
use crate::similarity::SimilarityGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} not in graph with {n} vertices")]
    UnknownVertex { vertex: usize, n: usize },
}

/// Connected components, each sorted ascending, ordered by smallest vertex.
pub fn connected_components(g: &SimilarityGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.clear();
        queue.push(s);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push(w);
                }
            }
        }
        let mut comp = queue.clone();
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Symmetrized raw-citation graph: an edge joins two distinct journals when
/// either direction carries at least `min_count` citations. The weight is
/// the larger of the two counts.
pub fn citation_graph(m: &CitationMatrix, min_count: u64) -> SimilarityGraph {
    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (i, j, c) in m.entries() {
        if i != j && c >= min_count {
            let key = (i.min(j), i.max(j));
            let e = best.entry(key).or_insert(0);
            *e = (*e).max(c);
        }
    }
    SimilarityGraph::new(
        m.labels().to_vec(),
        min_count as f64,
        best.into_iter().map(|((u, v), c)| (u, v, c as f64)),
    )
    .expect("symmetrized edges are simple")
}

/// Bi-connected structure of an undirected graph.
///
/// `components` holds the vertex sets of the bi-connected components with at
/// least three vertices; two-vertex components (bridges) are listed apart in
/// `bigraph_pairs`. All vertex lists are sorted ascending and the component
/// lists are sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BicomponentDecomposition {
    pub n: usize,
    pub components: Vec<Vec<usize>>,
    pub bigraph_pairs: Vec<[usize; 2]>,
    pub articulation_points: Vec<usize>,
    pub isolates: Vec<usize>,
}

impl BicomponentDecomposition {
    /// Vertices belonging to at least one component of size ≥ 3.
    pub fn covered(&self) -> Vec<usize> {
        let mut mark = vec![false; self.n];
        for c in &self.components {
            for &v in c {
                mark[v] = true;
            }
        }
        (0..self.n).filter(|&v| mark[v]).collect()
    }
}

/// Vertices contained in two or more of the given vertex sets.
fn shared_vertices<'a>(n: usize, sets: impl Iterator<Item = &'a [usize]>) -> Vec<usize> {
    let mut count = vec![0u32; n];
    for s in sets {
        for &v in s {
            count[v] += 1;
        }
    }
    (0..n).filter(|&v| count[v] >= 2).collect()
}

/// Hopcroft-Tarjan bi-connected components with an explicit DFS stack.
///
/// Returns the vertex set of every edge-level component in discovery order.
fn edge_components(g: &SimilarityGraph) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = g.n();
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut parent = vec![UNSEEN; n];
    let mut time = 0;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::new();

    for root in 0..n {
        if disc[root] != UNSEEN || g.degree(root) == 0 {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, 0));
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            let nbrs = g.weighted_neighbors(v);
            if top.1 < nbrs.len() {
                let w = nbrs[top.1].0 as usize;
                top.1 += 1;
                if disc[w] == UNSEEN {
                    parent[w] = v;
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    edges.push((v, w));
                    stack.push((w, 0));
                } else if w != parent[v] && disc[w] < disc[v] {
                    edges.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
                continue;
            }
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if low[v] >= disc[p] {
                    let mut comp = Vec::new();
                    while let Some((a, b)) = edges.pop() {
                        comp.push(a);
                        comp.push(b);
                        if (a, b) == (p, v) {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comp.dedup();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Bi-connected components, bridges and articulation points in linear time.
pub fn bicomponents(g: &SimilarityGraph) -> BicomponentDecomposition {
    let n = g.n();
    let all = edge_components(g);
    let articulation_points = shared_vertices(n, all.iter().map(Vec::as_slice));
    let mut components = Vec::new();
    let mut bigraph_pairs = Vec::new();
    for c in all {
        if c.len() == 2 {
            bigraph_pairs.push([c[0], c[1]]);
        } else {
            components.push(c);
        }
    }
    components.sort();
    bigraph_pairs.sort();
    let isolates = (0..n).filter(|&v| g.degree(v) == 0).collect();
    BicomponentDecomposition {
        n,
        components,
        bigraph_pairs,
        articulation_points,
        isolates,
    }
}

/// Brute-force articulation points: `v` qualifies when deleting it splits
/// its connected component. Quadratic; meant for checking small graphs.
pub fn articulation_oracle(g: &SimilarityGraph) -> Vec<usize> {
    let n = g.n();
    let count_parts = |removed: Option<usize>| -> usize {
        let mut seen = vec![false; n];
        if let Some(r) = removed {
            seen[r] = true;
        }
        let mut parts = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            parts += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for w in g.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        parts
    };
    let base = count_parts(None);
    // Removing a vertex drops its own part only when it was isolated; any
    // non-isolated vertex is a cut point iff the part count grows.
    (0..n)
        .filter(|&v| g.degree(v) > 0 && count_parts(Some(v)) > base)
        .collect()
}

/// Keep components with at least `min_size` vertices and recompute the
/// articulation points as the vertices shared by two or more survivors.
/// Bridges are dropped along with the other small components.
pub fn filter_components(
    d: &BicomponentDecomposition,
    min_size: usize,
) -> BicomponentDecomposition {
    assert!(min_size >= 3, "minimum component size is 3");
    let components: Vec<Vec<usize>> = d
        .components
        .iter()
        .filter(|c| c.len() >= min_size)
        .cloned()
        .collect();
    let articulation_points = shared_vertices(d.n, components.iter().map(Vec::as_slice));
    BicomponentDecomposition {
        n: d.n,
        components,
        bigraph_pairs: Vec::new(),
        articulation_points,
        isolates: d.isolates.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentStats {
    pub size_histogram: BTreeMap<usize, usize>,
    pub n_components: usize,
    pub n_articulation_points: usize,
    pub n_journals_covered: usize,
    pub largest: usize,
}

pub fn size_distribution(d: &BicomponentDecomposition) -> ComponentStats {
    let mut size_histogram = BTreeMap::new();
    for c in &d.components {
        *size_histogram.entry(c.len()).or_insert(0) += 1;
    }
    ComponentStats {
        size_histogram,
        n_components: d.components.len(),
        n_articulation_points: d.articulation_points.len(),
        n_journals_covered: d.covered().len(),
        largest: d.components.iter().map(Vec::len).max().unwrap_or(0),
    }
}

/// Induced subgraph on `vertices`, with original labels and weights. The
/// result's vertex order is ascending original index.
pub fn extract_subgraph(
    g: &SimilarityGraph,
    vertices: &[usize],
) -> Result<SimilarityGraph, GraphError> {
    let n = g.n();
    let mut keep: Vec<usize> = vertices.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&v| v >= n) {
        return Err(GraphError::UnknownVertex { vertex: bad, n });
    }
    let mut local = vec![usize::MAX; n];
    for (k, &v) in keep.iter().enumerate() {
        local[v] = k;
    }
    let labels = keep.iter().map(|&v| g.label(v).to_string()).collect();
    let edges: Vec<_> = g
        .edges()
        .filter(|&(u, v, _)| local[u] != usize::MAX && local[v] != usize::MAX)
        .map(|(u, v, w)| (local[u], local[v], w))
        .collect();
    Ok(SimilarityGraph::new(labels, g.threshold(), edges).expect("induced subgraph is simple"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
        SimilarityGraph::from_edges(n, edges).unwrap()
    }

    fn butterfly() -> SimilarityGraph {
        graph(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    }

    #[test]
    fn components_of_edgeless_graph() {
        assert_eq!(
            connected_components(&graph(3, &[])),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn components_path_plus_isolate() {
        let g = graph(4, &[(0, 1), (1, 2)]);
        assert_eq!(connected_components(&g), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn butterfly_has_two_blocks_and_one_cut_vertex() {
        let d = bicomponents(&butterfly());
        assert_eq!(d.components, vec![vec![0, 1, 2], vec![2, 3, 4]]);
        assert_eq!(d.articulation_points, vec![2]);
        assert!(d.bigraph_pairs.is_empty());
        assert_eq!(articulation_oracle(&butterfly()), vec![2]);
    }

    #[test]
    fn triangle_is_biconnected() {
        let d = bicomponents(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(d.components.len(), 1);
        assert!(d.articulation_points.is_empty());
    }

    #[test]
    fn path_yields_bigraph_pairs() {
        let d = bicomponents(&graph(3, &[(0, 1), (1, 2)]));
        assert!(d.components.is_empty());
        assert_eq!(d.bigraph_pairs, vec![[0, 1], [1, 2]]);
        assert_eq!(d.articulation_points, vec![1]);
    }

    #[test]
    fn oracle_on_k4_and_star() {
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(articulation_oracle(&k4).is_empty());
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(articulation_oracle(&star), vec![0]);
        assert_eq!(bicomponents(&star).articulation_points, vec![0]);
    }

    #[test]
    fn isolates_are_reported() {
        let d = bicomponents(&graph(4, &[(0, 1)]));
        assert_eq!(d.isolates, vec![2, 3]);
    }

    #[test]
    fn long_path_does_not_overflow() {
        let n = 200_000;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let d = bicomponents(&graph(n, &edges));
        assert_eq!(d.bigraph_pairs.len(), n - 1);
        assert_eq!(d.articulation_points.len(), n - 2);
    }

    #[test]
    fn filter_drops_small_components() {
        let d = BicomponentDecomposition {
            n: 20,
            components: vec![(0..3).collect(), (2..7).collect(), (6..18).collect()],
            bigraph_pairs: vec![[18, 19]],
            articulation_points: vec![2, 6, 18],
            isolates: vec![],
        };
        let f = filter_components(&d, 10);
        assert_eq!(f.components, vec![(6..18).collect::<Vec<_>>()]);
        assert!(f.articulation_points.is_empty());
        assert!(f.bigraph_pairs.is_empty());
        let f = filter_components(&d, 3);
        assert_eq!(f.articulation_points, vec![2, 6]);
    }

    #[test]
    fn size_histogram() {
        let d = BicomponentDecomposition {
            n: 11,
            components: vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8, 9, 10]],
            bigraph_pairs: vec![],
            articulation_points: vec![],
            isolates: vec![],
        };
        let s = size_distribution(&d);
        assert_eq!(s.size_histogram, BTreeMap::from([(3, 2), (5, 1)]));
        assert_eq!(s.n_components, 3);
        assert_eq!(s.n_journals_covered, 11);
        assert_eq!(s.largest, 5);

        let empty = size_distribution(&bicomponents(&graph(0, &[])));
        assert!(empty.size_histogram.is_empty());
        assert_eq!(empty.largest, 0);
    }

    #[test]
    fn extract_subgraph_cases() {
        let g = butterfly();
        assert_eq!(extract_subgraph(&g, &[0, 1, 2, 3, 4]).unwrap(), g);
        let t = extract_subgraph(&g, &[2, 1, 0]).unwrap();
        assert_eq!(t.n(), 3);
        assert_eq!(t.edge_count(), 3);
        assert_eq!(t.labels(), ["0", "1", "2"]);
        assert_eq!(extract_subgraph(&g, &[]).unwrap().n(), 0);
        assert_eq!(
            extract_subgraph(&g, &[7]),
            Err(GraphError::UnknownVertex { vertex: 7, n: 5 })
        );
    }

    #[test]
    fn citation_graph_symmetrizes() {
        let m = CitationMatrix::from_entries(
            vec!["A".into(), "B".into(), "C".into()],
            vec![(0, 1, 150), (1, 0, 3), (1, 2, 20), (2, 2, 500)],
        )
        .unwrap();
        let g = citation_graph(&m, 100);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 150.0)]);
        assert_eq!(citation_graph(&m, 1).edge_count(), 2);
    }
}
