//! Versioned little-endian binary files passed between CLI stages.
//!
//! Every file starts with a 4-byte magic and a `u16` version. Strings are
//! `u32` length + UTF-8 bytes; reals are IEEE-754 doubles.
//!
//! | magic  | payload |
//! |--------|---------|
//! | `SCMX` | citation matrix: labels, `u64` nnz, `(u32, u32, u64)` entries |
//! | `SCSM` | similarity: measure, policy, labels, packed upper triangle of `f64` + mask bytes, diagonal mask |
//! | `SCGR` | graph: labels, `f64` threshold, `u64` edge count, `(u32, u32, f64)` edges |
//! | `SCBD` | bicomponent decomposition: vertex count and four vertex-set lists |

use std::io::{self, Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::graph::BicomponentDecomposition;
use crate::ingest::CitationMatrix;
use crate::similarity::{DiagonalPolicy, Measure, SimilarityGraph, SimilarityMatrix};

pub const VERSION: u16 = 1;

pub const MATRIX_MAGIC: &[u8; 4] = b"SCMX";
pub const SIMILARITY_MAGIC: &[u8; 4] = b"SCSM";
pub const GRAPH_MAGIC: &[u8; 4] = b"SCGR";
pub const DECOMP_MAGIC: &[u8; 4] = b"SCBD";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("expected a {expected} file, found magic {found:?}")]
    WrongMagic {
        expected: &'static str,
        found: [u8; 4],
    },
    #[error("unsupported format version {0}")]
    Version(u16),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Matrix,
    Similarity,
    Graph,
    Decomposition,
}

/// Identify a file from its first four bytes.
pub fn sniff(bytes: &[u8]) -> Option<FileKind> {
    match bytes.get(..4)? {
        m if m == MATRIX_MAGIC => Some(FileKind::Matrix),
        m if m == SIMILARITY_MAGIC => Some(FileKind::Similarity),
        m if m == GRAPH_MAGIC => Some(FileKind::Graph),
        m if m == DECOMP_MAGIC => Some(FileKind::Decomposition),
        _ => None,
    }
}

fn header<W: Write>(w: &mut W, magic: &[u8; 4]) -> io::Result<()> {
    w.write_all(magic)?;
    w.write_u16::<LE>(VERSION)
}

fn expect_header<R: Read>(
    r: &mut R,
    magic: &'static [u8; 4],
    name: &'static str,
) -> Result<(), FormatError> {
    let mut found = [0u8; 4];
    r.read_exact(&mut found)?;
    if &found != magic {
        return Err(FormatError::WrongMagic {
            expected: name,
            found,
        });
    }
    let v = r.read_u16::<LE>()?;
    if v != VERSION {
        return Err(FormatError::Version(v));
    }
    Ok(())
}

fn write_labels<W: Write>(w: &mut W, labels: &[String]) -> io::Result<()> {
    w.write_u32::<LE>(labels.len() as u32)?;
    for l in labels {
        w.write_u32::<LE>(l.len() as u32)?;
        w.write_all(l.as_bytes())?;
    }
    Ok(())
}

fn read_labels<R: Read>(r: &mut R) -> Result<Vec<String>, FormatError> {
    let n = r.read_u32::<LE>()? as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let len = r.read_u32::<LE>()? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        out.push(
            String::from_utf8(buf)
                .map_err(|_| FormatError::Corrupt("label is not UTF-8".into()))?,
        );
    }
    Ok(out)
}

fn write_sets<W: Write>(w: &mut W, sets: &[Vec<usize>]) -> io::Result<()> {
    w.write_u32::<LE>(sets.len() as u32)?;
    for s in sets {
        w.write_u32::<LE>(s.len() as u32)?;
        for &v in s {
            w.write_u32::<LE>(v as u32)?;
        }
    }
    Ok(())
}

fn read_sets<R: Read>(r: &mut R) -> Result<Vec<Vec<usize>>, FormatError> {
    let k = r.read_u32::<LE>()? as usize;
    let mut out = Vec::with_capacity(k.min(1 << 20));
    for _ in 0..k {
        let len = r.read_u32::<LE>()? as usize;
        let mut s = Vec::with_capacity(len.min(1 << 20));
        for _ in 0..len {
            s.push(r.read_u32::<LE>()? as usize);
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_matrix<W: Write>(mut w: W, m: &CitationMatrix) -> io::Result<()> {
    header(&mut w, MATRIX_MAGIC)?;
    write_labels(&mut w, m.labels())?;
    w.write_u64::<LE>(m.nnz() as u64)?;
    for (i, j, c) in m.entries() {
        w.write_u32::<LE>(i as u32)?;
        w.write_u32::<LE>(j as u32)?;
        w.write_u64::<LE>(c)?;
    }
    w.flush()
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<CitationMatrix, FormatError> {
    expect_header(&mut r, MATRIX_MAGIC, "citation matrix")?;
    let labels = read_labels(&mut r)?;
    let nnz = r.read_u64::<LE>()? as usize;
    let mut entries = Vec::with_capacity(nnz.min(1 << 24));
    for _ in 0..nnz {
        let i = r.read_u32::<LE>()? as usize;
        let j = r.read_u32::<LE>()? as usize;
        entries.push((i, j, r.read_u64::<LE>()?));
    }
    CitationMatrix::from_entries(labels, entries).map_err(|e| FormatError::Corrupt(e.to_string()))
}

pub fn write_similarity<W: Write>(mut w: W, s: &SimilarityMatrix) -> io::Result<()> {
    header(&mut w, SIMILARITY_MAGIC)?;
    w.write_u8(match s.measure() {
        Measure::Pearson => 0,
        Measure::Cosine => 1,
    })?;
    w.write_u8(match s.policy() {
        DiagonalPolicy::Include => 0,
        DiagonalPolicy::ExcludePair => 1,
    })?;
    write_labels(&mut w, s.labels())?;
    for &v in s.packed_values() {
        w.write_f64::<LE>(v)?;
    }
    let mask: Vec<u8> = s.packed_defined().iter().map(|&d| d as u8).collect();
    w.write_all(&mask)?;
    let diag: Vec<u8> = s.self_defined().iter().map(|&d| d as u8).collect();
    w.write_all(&diag)?;
    w.flush()
}

pub fn read_similarity<R: Read>(mut r: R) -> Result<SimilarityMatrix, FormatError> {
    expect_header(&mut r, SIMILARITY_MAGIC, "similarity matrix")?;
    let measure = match r.read_u8()? {
        0 => Measure::Pearson,
        1 => Measure::Cosine,
        x => return Err(FormatError::Corrupt(format!("unknown measure tag {x}"))),
    };
    let policy = match r.read_u8()? {
        0 => DiagonalPolicy::Include,
        1 => DiagonalPolicy::ExcludePair,
        x => return Err(FormatError::Corrupt(format!("unknown diagonal tag {x}"))),
    };
    let labels = read_labels(&mut r)?;
    let n = labels.len();
    let len = n * n.saturating_sub(1) / 2;
    let mut values = vec![0.0; len];
    r.read_f64_into::<LE>(&mut values)?;
    let mut mask = vec![0u8; len];
    r.read_exact(&mut mask)?;
    let mut diag = vec![0u8; n];
    r.read_exact(&mut diag)?;
    Ok(SimilarityMatrix::from_packed(
        labels,
        measure,
        policy,
        values,
        mask.into_iter().map(|b| b != 0).collect(),
        diag.into_iter().map(|b| b != 0).collect(),
    ))
}

pub fn write_graph<W: Write>(mut w: W, g: &SimilarityGraph) -> io::Result<()> {
    header(&mut w, GRAPH_MAGIC)?;
    write_labels(&mut w, g.labels())?;
    w.write_f64::<LE>(g.threshold())?;
    w.write_u64::<LE>(g.edge_count() as u64)?;
    for (u, v, wt) in g.edges() {
        w.write_u32::<LE>(u as u32)?;
        w.write_u32::<LE>(v as u32)?;
        w.write_f64::<LE>(wt)?;
    }
    w.flush()
}

pub fn read_graph<R: Read>(mut r: R) -> Result<SimilarityGraph, FormatError> {
    expect_header(&mut r, GRAPH_MAGIC, "graph")?;
    let labels = read_labels(&mut r)?;
    let threshold = r.read_f64::<LE>()?;
    let m = r.read_u64::<LE>()? as usize;
    let mut edges = Vec::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let u = r.read_u32::<LE>()? as usize;
        let v = r.read_u32::<LE>()? as usize;
        edges.push((u, v, r.read_f64::<LE>()?));
    }
    SimilarityGraph::new(labels, threshold, edges).map_err(|e| FormatError::Corrupt(e.to_string()))
}

pub fn write_decomposition<W: Write>(mut w: W, d: &BicomponentDecomposition) -> io::Result<()> {
    header(&mut w, DECOMP_MAGIC)?;
    w.write_u32::<LE>(d.n as u32)?;
    write_sets(&mut w, &d.components)?;
    let pairs: Vec<Vec<usize>> = d.bigraph_pairs.iter().map(|p| p.to_vec()).collect();
    write_sets(&mut w, &pairs)?;
    write_sets(&mut w, &[d.articulation_points.clone(), d.isolates.clone()])?;
    w.flush()
}

pub fn read_decomposition<R: Read>(mut r: R) -> Result<BicomponentDecomposition, FormatError> {
    expect_header(&mut r, DECOMP_MAGIC, "decomposition")?;
    let n = r.read_u32::<LE>()? as usize;
    let components = read_sets(&mut r)?;
    let bigraph_pairs = read_sets(&mut r)?
        .into_iter()
        .map(|p| {
            <[usize; 2]>::try_from(p)
                .map_err(|_| FormatError::Corrupt("bigraph pair of wrong size".into()))
        })
        .collect::<Result<_, _>>()?;
    let mut rest = read_sets(&mut r)?;
    if rest.len() != 2 {
        return Err(FormatError::Corrupt(
            "missing articulation/isolate sets".into(),
        ));
    }
    let isolates = rest.pop().unwrap_or_default();
    let articulation_points = rest.pop().unwrap_or_default();
    let all = components
        .iter()
        .flatten()
        .chain(&articulation_points)
        .chain(&isolates);
    if let Some(v) = all.copied().find(|&v| v >= n) {
        return Err(FormatError::Corrupt(format!("vertex {v} out of range")));
    }
    Ok(BicomponentDecomposition {
        n,
        components,
        bigraph_pairs,
        articulation_points,
        isolates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bicomponents;
    use crate::similarity::pearson_similarity;

    fn matrix() -> CitationMatrix {
        CitationMatrix::from_entries(
            vec!["A".into(), "B".into(), "C".into(), "D".into()],
            vec![
                (0, 1, 5),
                (1, 0, 2),
                (0, 0, 7),
                (2, 3, 1),
                (3, 3, 9),
                (2, 2, 4),
            ],
        )
        .unwrap()
    }

    #[test]
    fn matrix_round_trip() {
        let m = matrix();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(sniff(&buf), Some(FileKind::Matrix));
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn similarity_round_trip_is_bitwise() {
        let s = pearson_similarity(&matrix(), DiagonalPolicy::Include);
        let mut buf = Vec::new();
        write_similarity(&mut buf, &s).unwrap();
        let back = read_similarity(buf.as_slice()).unwrap();
        let bits = |m: &SimilarityMatrix| {
            m.packed_values()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&s));
        assert_eq!(back.packed_defined(), s.packed_defined());
        assert_eq!(back.labels(), s.labels());
    }

    #[test]
    fn graph_and_decomposition_round_trip() {
        let g = SimilarityGraph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        assert_eq!(read_graph(buf.as_slice()).unwrap(), g);

        let d = bicomponents(&g);
        let mut buf = Vec::new();
        write_decomposition(&mut buf, &d).unwrap();
        assert_eq!(read_decomposition(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let mut buf = Vec::new();
        write_matrix(&mut buf, &matrix()).unwrap();
        assert!(matches!(
            read_graph(buf.as_slice()),
            Err(FormatError::WrongMagic { .. })
        ));
        buf[4] = 9;
        assert!(matches!(
            read_matrix(buf.as_slice()),
            Err(FormatError::Version(9))
        ));
    }
}
