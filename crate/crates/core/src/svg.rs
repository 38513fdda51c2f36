//! Static SVG maps. Output is byte-stable: edges first in `(u, v)` order,
//! then one circle per vertex, then optional labels, all in vertex order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::layout::Layout;
use crate::similarity::SimilarityGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("no coordinate for vertex {vertex} (layout has {available})")]
    MissingCoordinate { vertex: usize, available: usize },
    #[error("partition has {got} entries for {n} vertices")]
    PartitionLength { got: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub size: f64,
    pub margin: f64,
    pub vertex_radius: f64,
    /// Drawn white with a black stroke.
    pub highlight: BTreeSet<usize>,
    pub show_labels: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            size: 800.0,
            margin: 20.0,
            vertex_radius: 4.0,
            highlight: BTreeSet::new(),
            show_labels: false,
        }
    }
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939",
];

/// Fill for a partition class; class 0 (unassigned) is light grey.
fn class_color(c: u32) -> &'static str {
    if c == 0 {
        "#cccccc"
    } else {
        PALETTE[(c as usize - 1) % PALETTE.len()]
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_svg(
    g: &SimilarityGraph,
    layout: &Layout,
    partition: Option<&[u32]>,
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    let n = g.n();
    if layout.positions.len() < n {
        return Err(RenderError::MissingCoordinate {
            vertex: layout.positions.len(),
            available: layout.positions.len(),
        });
    }
    if let Some(p) = partition {
        if p.len() != n {
            return Err(RenderError::PartitionLength { got: p.len(), n });
        }
    }
    let span = opts.size - 2.0 * opts.margin;
    let at = |v: usize| {
        let q = layout.positions[v];
        (opts.margin + q[0] * span, opts.margin + (1.0 - q[1]) * span)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        opts.size
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(out, "<g stroke=\"#999999\" stroke-width=\"0.5\">");
    for (u, v, _) in g.edges() {
        let (x1, y1) = at(u);
        let (x2, y2) = at(v);
        let _ = writeln!(
            out,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>"
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g stroke-width=\"1\">");
    for v in 0..n {
        let (x, y) = at(v);
        let (fill, stroke) = if opts.highlight.contains(&v) {
            ("white", "black")
        } else {
            (class_color(partition.map_or(1, |p| p[v])), "#333333")
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\"><title>{}</title></circle>",
            opts.vertex_radius,
            escape(g.label(v))
        );
    }
    let _ = writeln!(out, "</g>");
    if opts.show_labels {
        let _ = writeln!(
            out,
            "<g font-family=\"sans-serif\" font-size=\"9\" fill=\"#000000\">"
        );
        for v in 0..n {
            let (x, y) = at(v);
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
                x + opts.vertex_radius + 1.0,
                y,
                escape(g.label(v))
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
