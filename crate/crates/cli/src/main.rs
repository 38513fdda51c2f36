//! `scimap`: command-line front end.
//!
//! Exit status is 0 on success, 1 for bad input or arguments and 2 when an
//! internal consistency check fails.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use scimap_core::binfmt::{self, FileKind};
use scimap_core::decompose::{
    articulation_report, classify, decompose, describe_split, ClusterTree, DecomposeParams,
};
use scimap_core::fsutil::{write_atomic, write_atomic_with};
use scimap_core::graph::{bicomponents, filter_components, size_distribution};
use scimap_core::ingest::{
    apply_citation_threshold, drop_ones, filter_low_activity, matrix_stats, read_citation_file,
    write_citation_csv, CitationMatrix,
};
use scimap_core::layout::{
    layout_auto, layout_from_json, layout_to_json, AlgorithmChoice, Layout, LayoutAlgorithm,
    LayoutParams,
};
use scimap_core::pajek::{write_pajek_arcs, write_pajek_clu, write_pajek_net};
use scimap_core::pipeline::{run_pipeline, PipelineConfig};
use scimap_core::similarity::{
    similarity, threshold_graph, DiagonalPolicy, Measure, SimilarityGraph,
};
use scimap_core::svg::{render_svg, RenderOptions};
use scimap_core::synth::{generate_synthetic, BridgeRate, SyntheticSpec};

/// Marks an error as a failed internal check (exit status 2).
#[derive(Debug)]
struct Invariant(String);

impl std::fmt::Display for Invariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal invariant violated: {}", self.0)
    }
}

impl std::error::Error for Invariant {}

#[derive(Parser)]
#[command(
    name = "scimap",
    version,
    about = "Journal maps from aggregated citation matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a citing,cited,count CSV (optionally .gz) into matrix.bin.
    Ingest {
        input: PathBuf,
        /// Drop every count equal to 1.
        #[arg(long)]
        drop_ones: bool,
        /// Exclude journals whose total citing is below N.
        #[arg(long, default_value_t = 0)]
        min_citing: u64,
        /// Zero out cells with fewer than N citations.
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print matrix statistics for a CSV or matrix.bin.
    Stats {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Pairwise similarity of citing rows.
    Similarity {
        matrix: PathBuf,
        #[arg(long, default_value = "pearson")]
        measure: Measure,
        #[arg(long, default_value = "include")]
        diagonal: DiagonalPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Threshold a similarity matrix into a graph.
    Graph {
        similarity: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        rmin: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bi-connected components and articulation points of a graph.
    Components {
        graph: PathBuf,
        #[arg(long, default_value_t = 3)]
        min_size: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a similarity matrix along a threshold ladder.
    Decompose {
        similarity: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.8,0.9,0.95")]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        min_size: usize,
        #[arg(long, default_value_t = 200)]
        max_size: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        classification: Option<PathBuf>,
        /// Print the articulation points found at this rung.
        #[arg(long)]
        report: Option<f64>,
    },
    /// Compute map coordinates for a graph.
    Layout {
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        algo: AlgorithmChoice,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a graph as SVG.
    Render {
        graph: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        /// Pajek .clu partition used for colors.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Draw the graph's articulation points white.
        #[arg(long)]
        highlight_articulation: bool,
        #[arg(long)]
        labels: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a matrix.bin (as arcs) or graph.bin (as edges) in Pajek format.
    ExportPajek {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the top-level clusters of this tree.json as a .clu file.
        #[arg(long, requires = "clu")]
        tree: Option<PathBuf>,
        #[arg(long)]
        clu: Option<PathBuf>,
    },
    /// Generate a planted-block citation matrix (.csv or .bin by extension).
    Synth {
        #[arg(long, value_delimiter = ',', default_value = "15,15,15")]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 50.0)]
        intra: f64,
        #[arg(long, default_value_t = 0.0)]
        inter: f64,
        #[arg(long, default_value_t = 2)]
        bridges: usize,
        #[arg(long, default_value = "auto")]
        bridge_rate: BridgeRate,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "scimap-out")]
        out: PathBuf,
    },
}

/// Write to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn sniff(path: &Path) -> Result<Option<FileKind>> {
    use std::io::Read;
    let mut head = [0u8; 4];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let got = f.read(&mut head)?;
    Ok(binfmt::sniff(&head[..got]))
}

fn read_matrix_any(path: &Path) -> Result<CitationMatrix> {
    if sniff(path)? == Some(FileKind::Matrix) {
        Ok(binfmt::read_matrix(open(path)?).with_context(|| path.display().to_string())?)
    } else {
        Ok(read_citation_file(path).with_context(|| path.display().to_string())?)
    }
}

fn read_graph(path: &Path) -> Result<SimilarityGraph> {
    binfmt::read_graph(open(path)?).with_context(|| path.display().to_string())
}

fn save(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn save_with<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<File>) -> std::io::Result<()>,
{
    write_atomic_with(path, fill).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            input,
            drop_ones: ones,
            min_citing,
            min_count,
            out,
        } => {
            let raw = read_citation_file(&input).with_context(|| input.display().to_string())?;
            let mut m = apply_citation_threshold(&raw, min_count);
            if ones {
                m = drop_ones(&m);
            }
            let (m, excluded) = filter_low_activity(&m, min_citing);
            save_with(&out, |w| binfmt::write_matrix(w, &m))?;
            eprintln!(
                "{} journals read, {} excluded, {} written to {}",
                raw.n(),
                excluded.len(),
                m.n(),
                out.display()
            );
        }
        Command::Stats { input, json } => {
            let s = matrix_stats(&read_matrix_any(&input)?);
            if json {
                emit(&(serde_json::to_string_pretty(&s)? + "\n"))?;
            } else {
                emit(&s.to_string())?;
            }
        }
        Command::Similarity {
            matrix,
            measure,
            diagonal,
            out,
        } => {
            let m = read_matrix_any(&matrix)?;
            let s = similarity(&m, measure, diagonal);
            save_with(&out, |w| binfmt::write_similarity(w, &s))?;
        }
        Command::Graph {
            similarity,
            rmin,
            out,
        } => {
            if !(-1.0..=1.0).contains(&rmin) {
                bail!("--rmin must lie in [-1, 1], got {rmin}");
            }
            let s = binfmt::read_similarity(open(&similarity)?)
                .with_context(|| similarity.display().to_string())?;
            let g = threshold_graph(&s, rmin);
            save_with(&out, |w| binfmt::write_graph(w, &g))?;
            eprintln!(
                "{} vertices, {} edges at r >= {rmin}",
                g.n(),
                g.edge_count()
            );
        }
        Command::Components {
            graph,
            min_size,
            json,
            out,
        } => {
            if min_size < 3 {
                bail!("--min-size must be at least 3");
            }
            let g = read_graph(&graph)?;
            let d = filter_components(&bicomponents(&g), min_size);
            let stats = size_distribution(&d);
            if json {
                emit(&(serde_json::to_string_pretty(&stats)? + "\n"))?;
            } else {
                emit(&format!(
                    "components (size >= {min_size}) {:>8}\njournals included        {:>8}\narticulation points      {:>8}\n",
                    stats.n_components, stats.n_journals_covered, stats.n_articulation_points
                ))?;
            }
            if let Some(out) = out {
                save_with(&out, |w| binfmt::write_decomposition(w, &d))?;
            }
        }
        Command::Decompose {
            similarity,
            ladder,
            min_size,
            max_size,
            out,
            classification,
            report,
        } => {
            let s = binfmt::read_similarity(open(&similarity)?)
                .with_context(|| similarity.display().to_string())?;
            let params = DecomposeParams {
                ladder,
                min_size,
                max_component_size: max_size,
            };
            let tree = decompose(&s, &params)?;
            for split in tree.splits() {
                eprint!("{}", describe_split(split));
            }
            save(
                &out,
                (serde_json::to_string_pretty(&tree)? + "\n").as_bytes(),
            )?;
            if let Some(path) = classification {
                save(&path, classify(&tree).to_csv().as_bytes())?;
            }
            if let Some(level) = report {
                let labels: String = articulation_report(&tree, level)?
                    .into_iter()
                    .map(|j| j.label + "\n")
                    .collect();
                emit(&labels)?;
            }
        }
        Command::Layout {
            graph,
            algo,
            seed,
            iters,
            out,
        } => {
            let g = read_graph(&graph)?;
            let p = LayoutParams {
                seed,
                max_iterations: iters,
                ..LayoutParams::default()
            };
            let l = layout_auto(&g, &p, algo)?;
            save(&out, (layout_to_json(&g, &l, &p) + "\n").as_bytes())?;
        }
        Command::Render {
            graph,
            layout,
            partition,
            highlight_articulation,
            labels,
            out,
        } => {
            let g = read_graph(&graph)?;
            let text =
                std::fs::read_to_string(&layout).with_context(|| layout.display().to_string())?;
            let coords = layout_from_json(&text).with_context(|| layout.display().to_string())?;
            if coords.len() != g.n() || coords.iter().zip(g.labels()).any(|((a, _), b)| a != b) {
                bail!("{} does not match the graph's vertices", layout.display());
            }
            let l = Layout {
                positions: coords.into_iter().map(|(_, q)| q).collect(),
                algorithm: LayoutAlgorithm::Packed,
                initial_stress: None,
                final_stress: None,
                iterations_used: 0,
                edge_length: None,
            };
            let part = match partition {
                Some(p) => Some(scimap_core::pajek::read_pajek_clu(
                    &std::fs::read_to_string(&p)?,
                )?),
                None => None,
            };
            let highlight: BTreeSet<usize> = if highlight_articulation {
                bicomponents(&g).articulation_points.into_iter().collect()
            } else {
                BTreeSet::new()
            };
            let svg = render_svg(
                &g,
                &l,
                part.as_deref(),
                &RenderOptions {
                    highlight,
                    show_labels: labels,
                    ..Default::default()
                },
            )?;
            save(&out, svg.as_bytes())?;
        }
        Command::ExportPajek {
            input,
            out,
            tree,
            clu,
        } => {
            let text = match sniff(&input)? {
                Some(FileKind::Graph) => write_pajek_net(&read_graph(&input)?),
                Some(FileKind::Matrix) | None => write_pajek_arcs(&read_matrix_any(&input)?),
                Some(other) => bail!("cannot export a {other:?} file to Pajek"),
            };
            save(&out, text.as_bytes())?;
            if let (Some(tree), Some(clu)) = (tree, clu) {
                let t: ClusterTree = serde_json::from_reader(open(&tree)?)
                    .with_context(|| tree.display().to_string())?;
                let part = t.top_level_partition();
                save(&clu, write_pajek_clu(&part, part.len())?.as_bytes())?;
            }
        }
        Command::Synth {
            blocks,
            intra,
            inter,
            bridges,
            bridge_rate,
            seed,
            out,
        } => {
            let spec = SyntheticSpec {
                blocks,
                intra_rate: intra,
                inter_rate: inter,
                bridge_journals: bridges,
                bridge_rate,
                seed,
            };
            let m = generate_synthetic(&spec)?;
            if out.extension().is_some_and(|e| e == "bin") {
                save_with(&out, |w| binfmt::write_matrix(w, &m))?;
            } else {
                save_with(&out, |w| write_citation_csv(&m, w))?;
            }
        }
        Command::Pipeline { config, out } => {
            let c = PipelineConfig::from_file(&config)?;
            let result = match run_pipeline(&c) {
                Err(e) if e.is_invariant() => return Err(Invariant(e.to_string()).into()),
                r => r?,
            };
            result.write_to(&out)?;
            let m = &result.manifest;
            eprintln!(
                "{} journals, {} excluded, {} final clusters ({} ladder-exhausted); outputs in {}",
                m.ingest.input_journals,
                m.ingest.excluded_low_activity,
                m.final_clusters,
                m.ladder_exhausted,
                out.display()
            );
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SCIMAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("SCIMAP_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Invariant(e.to_string()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invariant>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
