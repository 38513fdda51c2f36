//! Hierarchical journal classification from aggregated journal-journal
//! citation matrices.
//!
//! The pipeline turns a sparse citing→cited count matrix into Pearson (or
//! cosine) similarities between citing patterns, cuts the similarity matrix
//! at a threshold, and splits the resulting graph into bi-connected
//! components. Components that are still too large are re-cut at the next
//! rung of a threshold ladder. Articulation points mark the journals that
//! sit between clusters.
//!
//! Module map:
//!
//! * [`ingest`]: CSV edge lists, matrix statistics, raw-count filters
//! * [`similarity`]: pairwise similarity and threshold graphs
//! * [`graph`]: connected components, bicomponents, articulation points
//! * [`decompose`]: threshold-ladder cluster tree and classification
//! * [`layout`]: Kamada-Kawai and Fruchterman-Reingold map coordinates
//! * [`pajek`], [`svg`], [`synth`], [`pipeline`]: interchange, rendering,
//!   planted test data and the end-to-end run
//!
//! With the default `parallel` feature the pairwise kernels run on rayon.
//! Without it everything runs on the calling thread; results are
//! bit-identical either way.

pub mod binfmt;
pub mod decompose;
pub mod exec;
pub mod graph;
pub mod ingest;
pub mod layout;
pub mod pajek;
pub mod pipeline;
pub mod similarity;
pub mod svg;
pub mod synth;

pub mod fsutil;

pub use decompose::{
    articulation_report, classify, decompose, decompose_within, Classification, ClassificationRow,
    ClusterNode, ClusterTree, DecomposeError, DecomposeParams, NodeStatus, Split,
};
pub use exec::Execution;
pub use graph::{
    articulation_oracle, bicomponents, connected_components, extract_subgraph, filter_components,
    size_distribution, BicomponentDecomposition, ComponentStats, GraphError,
};
pub use ingest::{
    apply_citation_threshold, filter_low_activity, matrix_stats, parse_citation_csv,
    read_citation_file, CitationMatrix, IngestError, JournalId, MatrixStats,
};
pub use layout::{
    layout_auto, layout_fruchterman_reingold, layout_kamada_kawai, stress, Layout, LayoutAlgorithm,
    LayoutError, LayoutParams,
};
pub use similarity::{
    cosine_similarity, degree_summary, pearson_similarity, threshold_graph, DegreeSummary,
    DiagonalPolicy, Measure, SimilarityGraph, SimilarityMatrix,
};
