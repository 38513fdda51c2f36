//! End-to-end run: ingest, filter, similarity, decomposition, layout and
//! exports, driven by a flat `key = value` config file.
//!
//! ```text
//! # comments and blank lines are ignored
//! input = synthetic            # or a path to a citing,cited,count CSV (.gz ok)
//! synthetic.blocks = 15,15,15
//! synthetic.intra_rate = 50
//! synthetic.inter_rate = 0
//! synthetic.bridge_journals = 2
//! synthetic.bridge_rate = auto   # or a fixed rate
//! synthetic.seed = 1
//! drop_ones = false
//! min_count = 1
//! min_citing = 0
//! measure = pearson            # or cosine
//! diagonal = include           # or exclude-pair
//! ladder = 0.8,0.9,0.95
//! min_size = 10
//! max_size = 200
//! layout = auto                # kk | fr | auto
//! layout_seed = 1
//! layout_iters = 1000
//! ```
//!
//! All outputs are computed in memory by [`run_pipeline`] and written with
//! [`PipelineOutput::write_to`]. Nothing in them depends on the thread count
//! or the clock.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{
    classify, decompose, ClusterNode, ClusterTree, DecomposeParams, NodeStatus, Split,
};
use crate::fsutil::write_atomic;
use crate::graph::extract_subgraph;
use crate::ingest::{
    apply_citation_threshold, drop_ones, filter_low_activity, read_citation_file, CitationMatrix,
};
use crate::layout::{layout_auto, AlgorithmChoice, LayoutParams};
use crate::pajek::{write_pajek_clu, write_pajek_net};
use crate::similarity::{similarity, threshold_subgraph, DiagonalPolicy, Measure};
use crate::svg::{render_svg, RenderOptions};
use crate::synth::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Ingest,
    Filter,
    Similarity,
    Decompose,
    Layout,
    Render,
    Export,
    Manifest,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    /// Bad input data or parameters.
    #[error("{stage}: {msg}")]
    Input { stage: Stage, msg: String },
    /// A consistency check failed; this is a bug, not a user error.
    #[error("{stage}: internal invariant violated: {msg}")]
    Invariant { stage: Stage, msg: String },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn is_invariant(&self) -> bool {
        matches!(self, PipelineError::Invariant { .. })
    }

    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Config { .. } => Stage::Config,
            PipelineError::Input { stage, .. } | PipelineError::Invariant { stage, .. } => *stage,
            PipelineError::Io { .. } => Stage::Export,
        }
    }
}

fn input(stage: Stage, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input {
        stage,
        msg: e.to_string(),
    }
}

fn invariant(stage: Stage, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Invariant {
        stage,
        msg: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSource {
    Synthetic,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub synthetic: SyntheticSpec,
    pub drop_ones: bool,
    pub min_count: u64,
    pub min_citing: u64,
    pub measure: Measure,
    pub diagonal: DiagonalPolicy,
    pub decompose: DecomposeParams,
    pub layout: AlgorithmChoice,
    pub layout_params: LayoutParams,
    /// The config text exactly as read.
    #[serde(skip)]
    pub source: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: InputSource::Synthetic,
            synthetic: SyntheticSpec::default(),
            drop_ones: false,
            min_count: 1,
            min_citing: 0,
            measure: Measure::Pearson,
            diagonal: DiagonalPolicy::Include,
            decompose: DecomposeParams::default(),
            layout: AlgorithmChoice::Auto,
            layout_params: LayoutParams::default(),
            source: String::new(),
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, PipelineError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| PipelineError::Config {
        line,
        msg: format!("{key}: cannot parse {v:?}: {e}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>, PipelineError>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|x| parse_value(line, key, x.trim()))
        .collect()
}

impl PipelineConfig {
    /// Parse config text. Relative input paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut c = PipelineConfig {
            source: text.to_string(),
            ..Default::default()
        };
        let mut seen = BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(PipelineError::Config {
                    line,
                    msg: format!("expected key = value, got {body:?}"),
                });
            };
            let (key, v) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(PipelineError::Config {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
            match key {
                "input" if v == "synthetic" => c.input = InputSource::Synthetic,
                "input" => c.input = InputSource::File(base_dir.join(v)),
                "synthetic.blocks" => c.synthetic.blocks = parse_list(line, key, v)?,
                "synthetic.intra_rate" => c.synthetic.intra_rate = parse_value(line, key, v)?,
                "synthetic.inter_rate" => c.synthetic.inter_rate = parse_value(line, key, v)?,
                "synthetic.bridge_journals" => {
                    c.synthetic.bridge_journals = parse_value(line, key, v)?
                }
                "synthetic.bridge_rate" => c.synthetic.bridge_rate = parse_value(line, key, v)?,
                "synthetic.seed" => c.synthetic.seed = parse_value(line, key, v)?,
                "drop_ones" => c.drop_ones = parse_value(line, key, v)?,
                "min_count" => c.min_count = parse_value(line, key, v)?,
                "min_citing" => c.min_citing = parse_value(line, key, v)?,
                "measure" => c.measure = parse_value(line, key, v)?,
                "diagonal" => c.diagonal = parse_value(line, key, v)?,
                "ladder" => c.decompose.ladder = parse_list(line, key, v)?,
                "min_size" => c.decompose.min_size = parse_value(line, key, v)?,
                "max_size" => c.decompose.max_component_size = parse_value(line, key, v)?,
                "layout" => c.layout = parse_value(line, key, v)?,
                "layout_seed" => c.layout_params.seed = parse_value(line, key, v)?,
                "layout_iters" => c.layout_params.max_iterations = parse_value(line, key, v)?,
                _ => {
                    return Err(PipelineError::Config {
                        line,
                        msg: format!("unknown key {key}"),
                    })
                }
            }
        }
        c.decompose
            .validate()
            .map_err(|e| input(Stage::Config, e))?;
        c.layout_params
            .validate()
            .map_err(|e| input(Stage::Config, e))?;
        if c.input == InputSource::Synthetic {
            c.synthetic
                .validate()
                .map_err(|e| input(Stage::Config, e))?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(Stage::Config, format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestCounts {
    pub input_journals: usize,
    pub nonzero_cells: usize,
    pub nonzero_after_count_filter: usize,
    pub excluded_low_activity: usize,
    pub excluded: Vec<String>,
    pub retained_journals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityCounts {
    pub measure: Measure,
    pub diagonal: DiagonalPolicy,
    pub journals: usize,
    pub defined_pairs: usize,
    pub undefined_pairs: usize,
}

/// Counts for one cut of one vertex set at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCounts {
    /// Path of the node being cut; empty for the whole matrix.
    pub path: String,
    pub threshold: f64,
    pub input_journals: usize,
    pub connected: usize,
    pub disconnected: usize,
    pub components: usize,
    pub journals_in_components: usize,
    pub articulation_points_all: usize,
    pub retained_components: usize,
    /// Distinct journals in retained components.
    pub clustered: usize,
    pub retained_articulation_points: Vec<String>,
    pub unclustered: usize,
    pub unclustered_tag: String,
    pub size_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterEntry {
    pub path: String,
    pub threshold: f64,
    pub size: usize,
    pub status: NodeStatus,
    /// Rendered map for final clusters.
    pub map: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config: String,
    pub parameters: PipelineConfig,
    pub ingest: IngestCounts,
    pub similarity: SimilarityCounts,
    pub levels: Vec<LevelCounts>,
    pub clusters: Vec<ClusterEntry>,
    pub final_clusters: usize,
    pub ladder_exhausted: usize,
    pub files: Vec<String>,
}

impl Manifest {
    /// Every stage must account for all of its input journals.
    pub fn check_consistency(&self) -> Result<(), String> {
        let i = &self.ingest;
        if i.excluded.len() != i.excluded_low_activity
            || i.excluded_low_activity + i.retained_journals != i.input_journals
        {
            return Err(format!(
                "ingest: {} excluded + {} retained != {} input",
                i.excluded_low_activity, i.retained_journals, i.input_journals
            ));
        }
        let pairs = self.similarity.journals * self.similarity.journals.saturating_sub(1) / 2;
        if self.similarity.journals != i.retained_journals
            || self.similarity.defined_pairs + self.similarity.undefined_pairs != pairs
        {
            return Err("similarity: pair counts do not add up".into());
        }
        for l in &self.levels {
            if l.connected + l.disconnected != l.input_journals {
                return Err(format!(
                    "level {:?} at {}: {} + {} != {}",
                    l.path, l.threshold, l.connected, l.disconnected, l.input_journals
                ));
            }
            if l.clustered + l.unclustered != l.connected {
                return Err(format!(
                    "level {:?} at {}: {} clustered + {} unclustered != {} connected",
                    l.path, l.threshold, l.clustered, l.unclustered, l.connected
                ));
            }
        }
        let finals = self
            .clusters
            .iter()
            .filter(|c| c.status != NodeStatus::Split)
            .count();
        if finals != self.final_clusters {
            return Err("final cluster count mismatch".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub tree: ClusterTree,
    pub manifest: Manifest,
    /// Relative path → contents, written in key order.
    pub files: BTreeMap<String, Vec<u8>>,
}

impl PipelineOutput {
    pub fn write_to(&self, out_dir: &Path) -> Result<(), PipelineError> {
        for (name, bytes) in &self.files {
            let path = out_dir.join(name);
            write_atomic(&path, bytes).map_err(|source| PipelineError::Io { path, source })?;
        }
        Ok(())
    }
}

fn load(c: &PipelineConfig) -> Result<CitationMatrix, PipelineError> {
    match &c.input {
        InputSource::Synthetic => {
            generate_synthetic(&c.synthetic).map_err(|e| input(Stage::Ingest, e))
        }
        InputSource::File(p) => {
            read_citation_file(p).map_err(|e| input(Stage::Ingest, format!("{}: {e}", p.display())))
        }
    }
}

fn level_counts(path: &str, input_journals: usize, s: &Split, labels: &[String]) -> LevelCounts {
    let mut aps: Vec<String> = s
        .articulation_points
        .iter()
        .map(|&v| labels[v].clone())
        .collect();
    aps.sort();
    let clustered: BTreeSet<usize> = s
        .children
        .iter()
        .flat_map(|c| c.vertices.iter().copied())
        .collect();
    LevelCounts {
        path: path.to_string(),
        threshold: s.threshold,
        input_journals,
        connected: input_journals - s.dropped.len(),
        disconnected: s.dropped.len(),
        components: s.stats.n_components,
        journals_in_components: s.stats.n_journals_covered,
        articulation_points_all: s.stats.n_articulation_points,
        retained_components: s.children.len(),
        clustered: clustered.len(),
        retained_articulation_points: aps,
        unclustered: s.unclustered.len(),
        unclustered_tag: s.unclustered_tag.clone(),
        size_histogram: s.stats.size_histogram.clone(),
    }
}

fn walk_levels(
    path: &str,
    node_size: usize,
    s: &Split,
    labels: &[String],
    out: &mut Vec<LevelCounts>,
) {
    out.push(level_counts(path, node_size, s, labels));
    for (k, c) in s.children.iter().enumerate() {
        if let Some(sp) = &c.split {
            let p = if path.is_empty() {
                format!("{}", k + 1)
            } else {
                format!("{path}.{}", k + 1)
            };
            walk_levels(&p, c.vertices.len(), sp, labels, out);
        }
    }
}

/// Run every stage for `c`; nothing is written to disk.
pub fn run_pipeline(c: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    // Ingest and filter.
    let raw = load(c)?;
    let mut m = apply_citation_threshold(&raw, c.min_count);
    if c.drop_ones {
        m = drop_ones(&m);
    }
    let nnz_filtered = m.nnz();
    let (m, excluded) = filter_low_activity(&m, c.min_citing);
    let ingest = IngestCounts {
        input_journals: raw.n(),
        nonzero_cells: raw.nnz(),
        nonzero_after_count_filter: nnz_filtered,
        excluded_low_activity: excluded.len(),
        excluded: excluded.into_iter().map(|j| j.label).collect(),
        retained_journals: m.n(),
    };

    // Similarity.
    let s = similarity(&m, c.measure, c.diagonal);
    let n = s.n();
    let defined = s.defined_pairs();
    let sim_counts = SimilarityCounts {
        measure: c.measure,
        diagonal: c.diagonal,
        journals: n,
        defined_pairs: defined,
        undefined_pairs: n * n.saturating_sub(1) / 2 - defined,
    };

    // Decomposition.
    let tree = decompose(&s, &c.decompose).map_err(|e| input(Stage::Decompose, e))?;
    let labels = tree.labels.clone();
    let mut levels = Vec::new();
    walk_levels("", n, &tree.top, &labels, &mut levels);
    let classification = classify(&tree);

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    // Per-cluster maps for final clusters; shared journals drawn white.
    let mut clusters = Vec::new();
    let nodes = tree.nodes();
    let parent_aps = |path: &str| -> BTreeSet<usize> {
        let parent = path.rsplit_once('.').map(|(p, _)| p);
        let split = match parent {
            None => &tree.top,
            Some(pp) => nodes
                .iter()
                .find(|(q, _)| q == pp)
                .and_then(|(_, node)| node.split.as_deref())
                .expect("parent of a node is a split"),
        };
        split.articulation_points.iter().copied().collect()
    };
    for (path, node) in &nodes {
        let map = if node.status == NodeStatus::Split {
            None
        } else {
            let name = format!("clusters/cluster-{path}.svg");
            let svg = render_cluster(&s, node, &parent_aps(path), c)?;
            files.insert(name.clone(), svg.into_bytes());
            Some(name)
        };
        clusters.push(ClusterEntry {
            path: path.clone(),
            threshold: node.threshold,
            size: node.vertices.len(),
            status: node.status,
            map,
        });
    }

    // Overview of the top-level clusters at the first rung.
    let partition = tree.top_level_partition();
    let in_top: Vec<usize> = (0..n).filter(|&v| partition[v] != 0).collect();
    let top_graph = threshold_subgraph(&s, c.decompose.ladder[0], &in_top);
    let overview = layout_auto(&top_graph, &c.layout_params, c.layout)
        .map_err(|e| invariant(Stage::Layout, e))?;
    let highlight: BTreeSet<usize> = in_top
        .iter()
        .enumerate()
        .filter(|(_, v)| tree.top.articulation_points.binary_search(v).is_ok())
        .map(|(k, _)| k)
        .collect();
    let local_part: Vec<u32> = in_top.iter().map(|&v| partition[v]).collect();
    let map = render_svg(
        &top_graph,
        &overview,
        Some(&local_part),
        &RenderOptions {
            highlight,
            ..Default::default()
        },
    )
    .map_err(|e| invariant(Stage::Render, e))?;
    files.insert("map.svg".into(), map.into_bytes());

    // Interchange exports over all retained journals.
    let full_graph = threshold_subgraph(&s, c.decompose.ladder[0], &(0..n).collect::<Vec<_>>());
    files.insert(
        "graph.net".into(),
        write_pajek_net(&full_graph).into_bytes(),
    );
    let clu = write_pajek_clu(&partition, n).map_err(|e| invariant(Stage::Export, e))?;
    files.insert("clusters.clu".into(), clu.into_bytes());
    files.insert(
        "classification.csv".into(),
        classification.to_csv().into_bytes(),
    );
    let tree_json = serde_json::to_string_pretty(&tree).map_err(|e| invariant(Stage::Export, e))?;
    files.insert("tree.json".into(), (tree_json + "\n").into_bytes());

    let final_clusters = clusters
        .iter()
        .filter(|e| e.status != NodeStatus::Split)
        .count();
    let ladder_exhausted = clusters
        .iter()
        .filter(|e| e.status == NodeStatus::LadderExhausted)
        .count();
    let mut names: Vec<String> = files.keys().cloned().collect();
    names.push("manifest.json".into());
    names.sort();
    let manifest = Manifest {
        config: c.source.clone(),
        parameters: c.clone(),
        ingest,
        similarity: sim_counts,
        levels,
        clusters,
        final_clusters,
        ladder_exhausted,
        files: names,
    };
    manifest
        .check_consistency()
        .map_err(|e| invariant(Stage::Manifest, e))?;
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| invariant(Stage::Manifest, e))?;
    files.insert("manifest.json".into(), (text + "\n").into_bytes());

    Ok(PipelineOutput {
        tree,
        manifest,
        files,
    })
}

fn render_cluster(
    s: &crate::similarity::SimilarityMatrix,
    node: &ClusterNode,
    shared: &BTreeSet<usize>,
    c: &PipelineConfig,
) -> Result<String, PipelineError> {
    let g = threshold_subgraph(s, node.threshold, &node.vertices);
    let g = extract_subgraph(&g, &(0..g.n()).collect::<Vec<_>>())
        .map_err(|e| invariant(Stage::Layout, e))?;
    let layout =
        layout_auto(&g, &c.layout_params, c.layout).map_err(|e| invariant(Stage::Layout, e))?;
    let highlight = node
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| shared.contains(v))
        .map(|(k, _)| k)
        .collect();
    render_svg(
        &g,
        &layout,
        None,
        &RenderOptions {
            highlight,
            show_labels: true,
            ..Default::default()
        },
    )
    .map_err(|e| invariant(Stage::Render, e))
}
