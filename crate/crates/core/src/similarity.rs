//! Pairwise similarity of citing patterns and the threshold graphs they induce.
//!
//! Each journal is represented by its full citing row (length `n`, zeros
//! included). Rows are stored sparsely; the contribution of the all-zero
//! coordinates is added in closed form so the cost of a pair is linear in
//! the number of nonzeros of the two rows.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::ingest::CitationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Pearson,
    Cosine,
}

impl std::str::FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pearson" => Ok(Measure::Pearson),
            "cosine" => Ok(Measure::Cosine),
            other => Err(format!(
                "unknown measure `{other}` (expected pearson|cosine)"
            )),
        }
    }
}

/// Whether the coordinates of the pair itself take part in its similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalPolicy {
    /// Full rows, self-citation coordinates included.
    #[default]
    Include,
    /// For pair (i, j), coordinates i and j are dropped from both rows.
    ExcludePair,
}

impl std::str::FromStr for DiagonalPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "include" => Ok(DiagonalPolicy::Include),
            "exclude-pair" | "exclude_pair" => Ok(DiagonalPolicy::ExcludePair),
            other => Err(format!(
                "unknown diagonal policy `{other}` (expected include|exclude-pair)"
            )),
        }
    }
}

/// Position of pair (i, j), i < j, in a packed strict upper triangle.
#[inline]
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Symmetric pairwise similarity. Off-diagonal values live in a packed
/// upper triangle alongside a mask of the pairs where the measure is
/// defined.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    labels: Vec<String>,
    measure: Measure,
    policy: DiagonalPolicy,
    values: Vec<f64>,
    defined: Vec<bool>,
    self_defined: Vec<bool>,
}

impl SimilarityMatrix {
    /// Assemble a matrix from packed upper-triangle data.
    ///
    /// Panics when the packed lengths do not match `labels.len()`.
    pub fn from_packed(
        labels: Vec<String>,
        measure: Measure,
        policy: DiagonalPolicy,
        values: Vec<f64>,
        defined: Vec<bool>,
        self_defined: Vec<bool>,
    ) -> Self {
        let n = labels.len();
        let len = n * n.saturating_sub(1) / 2;
        assert_eq!(values.len(), len, "packed value length");
        assert_eq!(defined.len(), len, "packed mask length");
        assert_eq!(self_defined.len(), n, "diagonal mask length");
        Self {
            labels,
            measure,
            policy,
            values,
            defined,
            self_defined,
        }
    }

    /// Build from a function over unordered pairs `i < j`; `None` marks an
    /// undefined pair. Every vertex is self-defined.
    pub fn from_fn<F>(labels: Vec<String>, measure: Measure, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Option<f64>,
    {
        let n = labels.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        let mut defined = Vec::with_capacity(values.capacity());
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values.push(v.unwrap_or(f64::NAN));
                defined.push(v.is_some());
            }
        }
        Self::from_packed(
            labels,
            measure,
            DiagonalPolicy::Include,
            values,
            defined,
            vec![true; n],
        )
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn policy(&self) -> DiagonalPolicy {
        self.policy
    }

    pub fn packed_values(&self) -> &[f64] {
        &self.values
    }

    pub fn packed_defined(&self) -> &[bool] {
        &self.defined
    }

    pub fn self_defined(&self) -> &[bool] {
        &self.self_defined
    }

    /// Similarity of `i` and `j`, or `None` when undefined.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => self.self_defined[i].then_some(1.0),
            Less => self.get_packed(i, j),
            Greater => self.get_packed(j, i),
        }
    }

    fn get_packed(&self, i: usize, j: usize) -> Option<f64> {
        let k = packed_index(self.n(), i, j);
        self.defined[k].then(|| self.values[k])
    }

    /// Number of defined off-diagonal pairs.
    pub fn defined_pairs(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }
}

/// Iterate the union of supports of two sorted sparse rows.
#[inline]
fn merge_rows(a: &[(u32, u64)], b: &[(u32, u64)], mut f: impl FnMut(u32, f64, f64)) {
    let (mut p, mut q) = (0, 0);
    while p < a.len() || q < b.len() {
        let ka = a.get(p).map_or(u32::MAX, |e| e.0);
        let kb = b.get(q).map_or(u32::MAX, |e| e.0);
        if ka == kb {
            f(ka, a[p].1 as f64, b[q].1 as f64);
            p += 1;
            q += 1;
        } else if ka < kb {
            f(ka, a[p].1 as f64, 0.0);
            p += 1;
        } else {
            f(kb, 0.0, b[q].1 as f64);
            q += 1;
        }
    }
}

struct RowSummary {
    sum: f64,
    nnz: usize,
    /// Sum of squared deviations from the row mean over the full row.
    ss: f64,
    /// Sum of squares.
    sq: f64,
}

fn summarize(row: &[(u32, u64)], n: usize) -> RowSummary {
    let sum: f64 = row.iter().map(|&(_, c)| c as f64).sum();
    let mean = sum / n as f64;
    let dev: f64 = row.iter().map(|&(_, c)| (c as f64 - mean).powi(2)).sum();
    let ss = dev + (n - row.len()) as f64 * mean * mean;
    let sq = row.iter().map(|&(_, c)| (c as f64).powi(2)).sum();
    RowSummary {
        sum,
        nnz: row.len(),
        ss,
        sq,
    }
}

fn pearson_full(m: &CitationMatrix, s: &[RowSummary], i: usize, j: usize) -> Option<f64> {
    let (si, sj) = (&s[i], &s[j]);
    if si.ss == 0.0 || sj.ss == 0.0 {
        return None;
    }
    let n = m.n();
    let mi = si.sum / n as f64;
    let mj = sj.sum / n as f64;
    let mut cov = 0.0;
    let mut union = 0usize;
    merge_rows(m.row(i), m.row(j), |_, x, y| {
        cov += (x - mi) * (y - mj);
        union += 1;
    });
    cov += (n - union) as f64 * mi * mj;
    Some((cov / (si.ss.sqrt() * sj.ss.sqrt())).clamp(-1.0, 1.0))
}

fn pearson_excluding(m: &CitationMatrix, i: usize, j: usize) -> Option<f64> {
    let n = m.n();
    if n < 4 {
        // Fewer than two coordinates remain.
        return None;
    }
    let skip = |k: u32| k as usize == i || k as usize == j;
    let (ri, rj) = (m.row(i), m.row(j));
    let len = (n - 2) as f64;
    let sum_x: f64 = ri.iter().filter(|e| !skip(e.0)).map(|e| e.1 as f64).sum();
    let sum_y: f64 = rj.iter().filter(|e| !skip(e.0)).map(|e| e.1 as f64).sum();
    let (mean_x, mean_y) = (sum_x / len, sum_y / len);
    let (mut cov, mut ssx, mut ssy) = (0.0, 0.0, 0.0);
    let (mut nx, mut ny, mut union) = (0usize, 0usize, 0usize);
    merge_rows(ri, rj, |k, x, y| {
        if skip(k) {
            return;
        }
        union += 1;
        if x != 0.0 {
            nx += 1;
            ssx += (x - mean_x).powi(2);
        }
        if y != 0.0 {
            ny += 1;
            ssy += (y - mean_y).powi(2);
        }
        cov += (x - mean_x) * (y - mean_y);
    });
    let zeros = |c: usize| len - c as f64;
    ssx += zeros(nx) * mean_x * mean_x;
    ssy += zeros(ny) * mean_y * mean_y;
    cov += zeros(union) * mean_x * mean_y;
    if ssx == 0.0 || ssy == 0.0 {
        return None;
    }
    Some((cov / (ssx.sqrt() * ssy.sqrt())).clamp(-1.0, 1.0))
}

fn cosine_pair(
    m: &CitationMatrix,
    s: &[RowSummary],
    policy: DiagonalPolicy,
    i: usize,
    j: usize,
) -> f64 {
    let skip =
        |k: u32| policy == DiagonalPolicy::ExcludePair && (k as usize == i || k as usize == j);
    let (mut dot, mut sqx, mut sqy) = (0.0, 0.0, 0.0);
    match policy {
        DiagonalPolicy::Include => {
            merge_rows(m.row(i), m.row(j), |_, x, y| dot += x * y);
            sqx = s[i].sq;
            sqy = s[j].sq;
        }
        DiagonalPolicy::ExcludePair => merge_rows(m.row(i), m.row(j), |k, x, y| {
            if !skip(k) {
                dot += x * y;
                sqx += x * x;
                sqy += y * y;
            }
        }),
    }
    if sqx == 0.0 || sqy == 0.0 {
        return 0.0;
    }
    (dot / (sqx.sqrt() * sqy.sqrt())).clamp(-1.0, 1.0)
}

fn build(
    m: &CitationMatrix,
    measure: Measure,
    policy: DiagonalPolicy,
    exec: Execution,
) -> SimilarityMatrix {
    let n = m.n();
    let summaries: Vec<RowSummary> = (0..n).map(|i| summarize(m.row(i), n)).collect();
    let len = n * n.saturating_sub(1) / 2;
    let mut values = vec![0.0; len];
    let mut defined = vec![false; len];

    // Carve the packed triangle into one mutable slice per row.
    let mut rows: Vec<(&mut [f64], &mut [bool])> = Vec::with_capacity(n);
    let (mut vrest, mut drest) = (values.as_mut_slice(), defined.as_mut_slice());
    for i in 0..n {
        let w = n - i - 1;
        let (v, vr) = vrest.split_at_mut(w);
        let (d, dr) = drest.split_at_mut(w);
        rows.push((v, d));
        vrest = vr;
        drest = dr;
    }

    exec.for_each_mut(&mut rows, |i, (vals, mask)| {
        for (off, j) in (i + 1..n).enumerate() {
            let v = match (measure, policy) {
                (Measure::Pearson, DiagonalPolicy::Include) => pearson_full(m, &summaries, i, j),
                (Measure::Pearson, DiagonalPolicy::ExcludePair) => pearson_excluding(m, i, j),
                (Measure::Cosine, _) => Some(cosine_pair(m, &summaries, policy, i, j)),
            };
            if let Some(v) = v {
                vals[off] = v;
                mask[off] = true;
            } else {
                vals[off] = f64::NAN;
            }
        }
    });
    drop(rows);

    let self_defined = summaries
        .iter()
        .map(|s| match measure {
            Measure::Pearson => s.ss > 0.0,
            Measure::Cosine => s.nnz > 0,
        })
        .collect();
    SimilarityMatrix::from_packed(
        m.labels().to_vec(),
        measure,
        policy,
        values,
        defined,
        self_defined,
    )
}

/// Pearson correlation between every pair of citing rows. Pairs where
/// either row has zero variance are flagged undefined.
pub fn pearson_similarity(m: &CitationMatrix, policy: DiagonalPolicy) -> SimilarityMatrix {
    pearson_similarity_with(m, policy, Execution::default())
}

pub fn pearson_similarity_with(
    m: &CitationMatrix,
    policy: DiagonalPolicy,
    exec: Execution,
) -> SimilarityMatrix {
    build(m, Measure::Pearson, policy, exec)
}

/// Cosine between every pair of citing rows; any pair with a zero vector is 0.
pub fn cosine_similarity(m: &CitationMatrix, policy: DiagonalPolicy) -> SimilarityMatrix {
    cosine_similarity_with(m, policy, Execution::default())
}

pub fn cosine_similarity_with(
    m: &CitationMatrix,
    policy: DiagonalPolicy,
    exec: Execution,
) -> SimilarityMatrix {
    build(m, Measure::Cosine, policy, exec)
}

pub fn similarity(
    m: &CitationMatrix,
    measure: Measure,
    policy: DiagonalPolicy,
) -> SimilarityMatrix {
    build(m, measure, policy, Execution::default())
}

/// Undirected weighted graph. Adjacency lists are sorted by neighbour and
/// hold each edge in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    labels: Vec<String>,
    threshold: f64,
    adj: Vec<Vec<(u32, f64)>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphBuildError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge ({0}, {1})")]
    ParallelEdge(usize, usize),
    #[error("edge ({0}, {1}) outside {2} vertices")]
    OutOfRange(usize, usize, usize),
}

impl SimilarityGraph {
    pub fn new<I>(labels: Vec<String>, threshold: f64, edges: I) -> Result<Self, GraphBuildError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = labels.len();
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(GraphBuildError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphBuildError::SelfLoop(u));
            }
            adj[u].push((v as u32, w));
            adj[v].push((u as u32, w));
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable_by_key(|e| e.0);
            if let Some(p) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                let v = p[0].0 as usize;
                return Err(GraphBuildError::ParallelEdge(u.min(v), u.max(v)));
            }
        }
        Ok(Self {
            labels,
            threshold,
            adj,
        })
    }

    /// Unweighted convenience constructor with unit weights and labels `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphBuildError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::new(labels, 0.0, edges.iter().map(|&(u, v)| (u, v, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|e| e.0 as usize)
    }

    pub fn weighted_neighbors(&self, v: usize) -> &[(u32, f64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let list = &self.adj[u];
        list.binary_search_by_key(&(v as u32), |e| e.0)
            .ok()
            .map(|k| list[k].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// Edges `(u, v, w)` with `u < v`, sorted ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |e| (e.0 as usize) > u)
                .map(move |e| (u, e.0 as usize, e.1))
        })
    }
}

/// Graph of all defined pairs with similarity ≥ `r_min`.
pub fn threshold_graph(s: &SimilarityMatrix, r_min: f64) -> SimilarityGraph {
    threshold_graph_with(s, r_min, Execution::default())
}

pub fn threshold_graph_with(s: &SimilarityMatrix, r_min: f64, exec: Execution) -> SimilarityGraph {
    let all: Vec<usize> = (0..s.n()).collect();
    threshold_subgraph_with(s, r_min, &all, exec)
}

/// Threshold graph induced on `vertices` (ascending, distinct). Vertex `k`
/// of the result is `vertices[k]` of `s`.
pub fn threshold_subgraph(s: &SimilarityMatrix, r_min: f64, vertices: &[usize]) -> SimilarityGraph {
    threshold_subgraph_with(s, r_min, vertices, Execution::default())
}

pub fn threshold_subgraph_with(
    s: &SimilarityMatrix,
    r_min: f64,
    vertices: &[usize],
    exec: Execution,
) -> SimilarityGraph {
    let k = vertices.len();
    let rows: Vec<Vec<(usize, usize, f64)>> = exec.map_range(k, |a| {
        let mut out = Vec::new();
        for b in a + 1..k {
            if let Some(v) = s.get(vertices[a], vertices[b]) {
                if v >= r_min {
                    out.push((a, b, v));
                }
            }
        }
        out
    });
    let labels = vertices.iter().map(|&v| s.labels()[v].clone()).collect();
    SimilarityGraph::new(labels, r_min, rows.into_iter().flatten())
        .expect("threshold graph edges are simple")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub degrees: Vec<usize>,
    /// Vertices with at least one edge.
    pub connected_count: usize,
}

pub fn degree_summary(g: &SimilarityGraph) -> DegreeSummary {
    let degrees: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let connected_count = degrees.iter().filter(|&&d| d > 0).count();
    DegreeSummary {
        degrees,
        connected_count,
    }
}
