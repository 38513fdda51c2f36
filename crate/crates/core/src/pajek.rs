//! Pajek `.net` networks and `.clu` partitions.
//!
//! Writers emit one canonical dialect: `*Vertices n`, one `i "label"` line
//! per vertex, then `*Edges` (similarity graphs) or `*Arcs` (citation
//! matrices) with `u v w` triples sorted by `(u, v)`. Weights carry at most
//! six significant digits with trailing zeros removed. Lines end in `\n`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ingest::CitationMatrix;
use crate::similarity::SimilarityGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PajekError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: unterminated quote")]
    UnterminatedQuote { line: usize },
    #[error("line {line}: endpoint {endpoint} outside 1..={n}")]
    EndpointOutOfRange {
        line: usize,
        endpoint: i64,
        n: usize,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("partition has {got} entries for {n} vertices")]
    LengthMismatch { got: usize, n: usize },
}

/// In-memory Pajek network with 0-based endpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PajekNetwork {
    pub labels: Vec<String>,
    pub arcs: Vec<(usize, usize, f64)>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl PajekNetwork {
    pub fn from_graph(g: &SimilarityGraph) -> Self {
        Self {
            labels: g.labels().to_vec(),
            arcs: Vec::new(),
            edges: g.edges().collect(),
        }
    }

    pub fn from_matrix(m: &CitationMatrix) -> Self {
        Self {
            labels: m.labels().to_vec(),
            arcs: m.entries().map(|(i, j, c)| (i, j, c as f64)).collect(),
            edges: Vec::new(),
        }
    }

    /// Undirected view of the `*Edges` section.
    pub fn to_graph(&self) -> Result<SimilarityGraph, crate::similarity::GraphBuildError> {
        SimilarityGraph::new(self.labels.clone(), f64::NAN, self.edges.iter().copied())
    }
}

/// Decimal with at most six significant digits and no trailing zeros.
pub fn format_weight(w: f64) -> String {
    if w == 0.0 {
        return "0".to_string();
    }
    if !w.is_finite() {
        return w.to_string();
    }
    let sci = format!("{w:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    // Value is 0.d1d2d3... × 10^(exp+1).
    let point = exp + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(digits);
    } else if point as usize >= digits.len() {
        out.push_str(digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

fn write_vertices(out: &mut String, labels: &[String]) {
    let _ = writeln!(out, "*Vertices {}", labels.len());
    for (i, l) in labels.iter().enumerate() {
        // Pajek labels cannot carry double quotes.
        let _ = writeln!(out, "{} \"{}\"", i + 1, l.replace('"', "'"));
    }
}

fn write_links(out: &mut String, header: &str, links: &[(usize, usize, f64)]) {
    let mut sorted = links.to_vec();
    sorted.sort_by_key(|&(u, v, _)| (u, v));
    let _ = writeln!(out, "{header}");
    for (u, v, w) in sorted {
        let _ = writeln!(out, "{} {} {}", u + 1, v + 1, format_weight(w));
    }
}

pub fn write_pajek_network(net: &PajekNetwork) -> String {
    let mut out = String::new();
    write_vertices(&mut out, &net.labels);
    if !net.labels.is_empty() {
        if !net.arcs.is_empty() {
            write_links(&mut out, "*Arcs", &net.arcs);
        }
        if !net.edges.is_empty() || net.arcs.is_empty() {
            write_links(&mut out, "*Edges", &net.edges);
        }
    }
    out
}

/// Similarity graph as `*Edges`.
pub fn write_pajek_net(g: &SimilarityGraph) -> String {
    let mut out = String::new();
    write_vertices(&mut out, g.labels());
    if g.n() > 0 {
        let edges: Vec<_> = g.edges().collect();
        write_links(&mut out, "*Edges", &edges);
    }
    out
}

/// Citation matrix as `*Arcs` weighted by counts.
pub fn write_pajek_arcs(m: &CitationMatrix) -> String {
    let mut out = String::new();
    write_vertices(&mut out, m.labels());
    if m.n() > 0 {
        let arcs: Vec<_> = m.entries().map(|(i, j, c)| (i, j, c as f64)).collect();
        write_links(&mut out, "*Arcs", &arcs);
    }
    out
}

enum Section {
    Vertices,
    Arcs,
    Edges,
}

fn parse_label(rest: &str, line: usize) -> Result<String, PajekError> {
    let rest = rest.trim_start();
    if let Some(stripped) = rest.strip_prefix('"') {
        match stripped.find('"') {
            Some(end) => Ok(stripped[..end].to_string()),
            None => Err(PajekError::UnterminatedQuote { line }),
        }
    } else {
        Ok(rest.split_whitespace().next().unwrap_or("").to_string())
    }
}

pub fn read_pajek_net(text: &str) -> Result<PajekNetwork, PajekError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (first_no, first) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() || l.trim_start().starts_with('%') => continue,
            Some(x) => break x,
            None => {
                return Err(PajekError::Header {
                    line: 1,
                    msg: "empty input".into(),
                })
            }
        }
    };
    let mut head = first.split_whitespace();
    let n: usize = match (head.next(), head.next()) {
        (Some(h), Some(count)) if h.eq_ignore_ascii_case("*vertices") => {
            count.parse().map_err(|_| PajekError::Header {
                line: first_no,
                msg: format!("bad vertex count `{count}`"),
            })?
        }
        _ => {
            return Err(PajekError::Header {
                line: first_no,
                msg: "expected `*Vertices n`".into(),
            })
        }
    };
    let mut net = PajekNetwork {
        labels: (1..=n).map(|i| i.to_string()).collect(),
        ..Default::default()
    };
    let mut section = Section::Vertices;
    for (no, raw) in lines {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('%') {
            continue;
        }
        if l.starts_with('*') {
            let key = l
                .split_whitespace()
                .next()
                .unwrap_or("")
                .to_ascii_lowercase();
            section = match key.as_str() {
                "*arcs" => Section::Arcs,
                "*edges" => Section::Edges,
                _ => {
                    return Err(PajekError::Header {
                        line: no,
                        msg: format!("unknown section `{l}`"),
                    })
                }
            };
            continue;
        }
        match section {
            Section::Vertices => {
                let (idx, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
                let i: i64 = idx.parse().map_err(|_| PajekError::Syntax {
                    line: no,
                    msg: format!("bad vertex index `{idx}`"),
                })?;
                if i < 1 || i as usize > n {
                    return Err(PajekError::EndpointOutOfRange {
                        line: no,
                        endpoint: i,
                        n,
                    });
                }
                net.labels[i as usize - 1] = parse_label(rest, no)?;
            }
            Section::Arcs | Section::Edges => {
                let mut it = l.split_whitespace();
                let mut endpoint = || -> Result<usize, PajekError> {
                    let tok = it.next().ok_or_else(|| PajekError::Syntax {
                        line: no,
                        msg: "missing endpoint".into(),
                    })?;
                    let v: i64 = tok.parse().map_err(|_| PajekError::Syntax {
                        line: no,
                        msg: format!("bad endpoint `{tok}`"),
                    })?;
                    if v < 1 || v as usize > n {
                        return Err(PajekError::EndpointOutOfRange {
                            line: no,
                            endpoint: v,
                            n,
                        });
                    }
                    Ok(v as usize - 1)
                };
                let u = endpoint()?;
                let v = endpoint()?;
                let w = match it.next() {
                    Some(tok) => tok.parse().map_err(|_| PajekError::Syntax {
                        line: no,
                        msg: format!("bad weight `{tok}`"),
                    })?,
                    None => 1.0,
                };
                if matches!(section, Section::Arcs) {
                    net.arcs.push((u, v, w));
                } else {
                    net.edges.push((u, v, w));
                }
            }
        }
    }
    Ok(net)
}

pub fn write_pajek_clu(partition: &[u32], n: usize) -> Result<String, PajekError> {
    if partition.len() != n {
        return Err(PajekError::LengthMismatch {
            got: partition.len(),
            n,
        });
    }
    let mut out = format!("*Vertices {n}\n");
    for c in partition {
        let _ = writeln!(out, "{c}");
    }
    Ok(out)
}

pub fn read_pajek_clu(text: &str) -> Result<Vec<u32>, PajekError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (no, first) = lines.next().ok_or(PajekError::Header {
        line: 1,
        msg: "empty input".into(),
    })?;
    let n: usize = first
        .split_whitespace()
        .nth(1)
        .filter(|_| first.to_ascii_lowercase().starts_with("*vertices"))
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| PajekError::Header {
            line: no,
            msg: "expected `*Vertices n`".into(),
        })?;
    let values = lines
        .map(|(no, l)| {
            l.parse().map_err(|_| PajekError::Syntax {
                line: no,
                msg: format!("bad cluster `{l}`"),
            })
        })
        .collect::<Result<Vec<u32>, _>>()?;
    if values.len() != n {
        return Err(PajekError::LengthMismatch {
            got: values.len(),
            n,
        });
    }
    Ok(values)
}
