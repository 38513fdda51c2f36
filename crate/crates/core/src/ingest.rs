//! Citation matrix ingestion, statistics and raw-count filters.
//!
//! The on-disk form is a neutral CSV edge list, one `citing,cited,count`
//! record per line with an optional `citing,cited,count` header. Labels get
//! dense indices in order of first appearance.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected 3 fields `citing,cited,count`, found {found}")]
    FieldCount { line: u64, found: usize },
    #[error("line {line}: count `{value}` is not an integer")]
    BadCount { line: u64, value: String },
    #[error("line {line}: non-positive count {value}")]
    NonPositiveCount { line: u64, value: i64 },
    #[error("line {line}: empty journal label")]
    EmptyLabel { line: u64 },
    #[error("line {line}: duplicate record for ({citing}, {cited})")]
    Duplicate {
        line: u64,
        citing: String,
        cited: String,
    },
    #[error("line {line}: malformed CSV: {msg}")]
    Csv { line: u64, msg: String },
    #[error("invalid matrix: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Dense handle for a journal plus its title abbreviation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JournalId {
    pub index: usize,
    pub label: String,
}

/// Sparse citing→cited count matrix. Row `i` holds the journals cited by
/// journal `i`, sorted by column, each count ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationMatrix {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<(u32, u64)>>,
}

impl CitationMatrix {
    /// Build a matrix from labels and `(citing, cited, count)` triples.
    pub fn from_entries<I>(labels: Vec<String>, entries: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(IngestError::Invalid(format!("empty label at index {i}")));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(IngestError::Invalid(format!("duplicate label `{l}`")));
            }
        }
        let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
        for (i, j, c) in entries {
            if i >= n || j >= n {
                return Err(IngestError::Invalid(format!(
                    "entry ({i}, {j}) outside {n}x{n}"
                )));
            }
            if c == 0 {
                return Err(IngestError::Invalid(format!("zero count at ({i}, {j})")));
            }
            rows[i].push((j as u32, c));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(IngestError::Invalid(format!(
                    "duplicate entry ({i}, {})",
                    w[0].0
                )));
            }
        }
        Ok(Self {
            labels,
            index,
            rows,
        })
    }

    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn journal(&self, i: usize) -> JournalId {
        JournalId {
            index: i,
            label: self.labels[i].clone(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Sorted `(cited, count)` pairs of journal `i`.
    pub fn row(&self, i: usize) -> &[(u32, u64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&(j as u32), |&(c, _)| c)
            .map(|k| row[k].1)
            .unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.rows[i].iter().map(|&(_, c)| c).sum()
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, c)| (i, j as usize, c)))
    }

    /// The cited-dimension view: entry (i, j) becomes (j, i).
    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.entries().map(|(i, j, c)| (j, i, c)).collect();
        Self::from_entries(self.labels.clone(), entries).expect("transpose of a valid matrix")
    }
}

/// Database-level counts for a citation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub n: usize,
    pub nonzero_count: usize,
    pub density: f64,
    pub uncited_count: usize,
    pub non_citing_count: usize,
    pub self_citation_total: u64,
    pub citing_totals: Vec<u64>,
}

impl fmt::Display for MatrixStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let total: u64 = self.citing_totals.iter().sum();
        let rows: [(&str, String); 7] = [
            ("journals", self.n.to_string()),
            ("nonzero cells", self.nonzero_count.to_string()),
            ("density", format!("{:.6}", self.density)),
            ("uncited journals", self.uncited_count.to_string()),
            ("non-citing journals", self.non_citing_count.to_string()),
            ("self-citations", self.self_citation_total.to_string()),
            ("total citations", total.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v:>12}")?;
        }
        Ok(())
    }
}

pub fn matrix_stats(m: &CitationMatrix) -> MatrixStats {
    let n = m.n();
    let mut cited = vec![false; n];
    let mut self_total = 0;
    for (i, j, c) in m.entries() {
        cited[j] = true;
        if i == j {
            self_total += c;
        }
    }
    let citing_totals: Vec<u64> = (0..n).map(|i| m.row_sum(i)).collect();
    let nonzero_count = m.nnz();
    MatrixStats {
        n,
        nonzero_count,
        density: if n == 0 {
            0.0
        } else {
            nonzero_count as f64 / (n as f64 * n as f64)
        },
        uncited_count: cited.iter().filter(|&&c| !c).count(),
        non_citing_count: (0..n).filter(|&i| m.row(i).is_empty()).count(),
        self_citation_total: self_total,
        citing_totals,
    }
}

/// Drop every entry below `min_count`. All journals stay, possibly isolated.
pub fn apply_citation_threshold(m: &CitationMatrix, min_count: u64) -> CitationMatrix {
    let rows = m
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .copied()
                .filter(|&(_, c)| c >= min_count)
                .collect()
        })
        .collect();
    CitationMatrix {
        labels: m.labels.clone(),
        index: m.index.clone(),
        rows,
    }
}

/// Remove count-1 cells, mimicking data sources that truncate them.
pub fn drop_ones(m: &CitationMatrix) -> CitationMatrix {
    apply_citation_threshold(m, 2)
}

/// Remove journals whose total citing (diagonal included) is below
/// `min_total_citing` from both dimensions, re-indexing the survivors in
/// ascending original order. Excluded journals are returned sorted by label.
pub fn filter_low_activity(
    m: &CitationMatrix,
    min_total_citing: u64,
) -> (CitationMatrix, Vec<JournalId>) {
    let n = m.n();
    let keep: Vec<bool> = (0..n).map(|i| m.row_sum(i) >= min_total_citing).collect();
    let mut remap = vec![usize::MAX; n];
    let mut labels = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..n {
        if keep[i] {
            remap[i] = labels.len();
            labels.push(m.labels[i].clone());
        } else {
            excluded.push(m.journal(i));
        }
    }
    excluded.sort_by(|a, b| a.label.cmp(&b.label));
    let entries: Vec<_> = m
        .entries()
        .filter(|&(i, j, _)| keep[i] && keep[j])
        .map(|(i, j, c)| (remap[i], remap[j], c))
        .collect();
    let out = CitationMatrix::from_entries(labels, entries).expect("filtered matrix stays valid");
    (out, excluded)
}

fn is_header(rec: &csv::StringRecord) -> bool {
    rec.len() == 3
        && rec[0].eq_ignore_ascii_case("citing")
        && rec[1].eq_ignore_ascii_case("cited")
        && rec[2].eq_ignore_ascii_case("count")
}

/// Parse a `citing,cited,count` edge list.
pub fn parse_citation_csv<R: Read>(reader: R) -> Result<CitationMatrix, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut entries = Vec::new();
    let mut intern = |label: &str| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = labels.len();
        labels.push(label.to_string());
        index.insert(label.to_string(), i);
        i
    };
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| IngestError::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if first {
            first = false;
            if is_header(&record) {
                continue;
            }
        }
        if record.len() != 3 {
            return Err(IngestError::FieldCount {
                line,
                found: record.len(),
            });
        }
        let (citing, cited, raw) = (&record[0], &record[1], &record[2]);
        if citing.is_empty() || cited.is_empty() {
            return Err(IngestError::EmptyLabel { line });
        }
        let value: i64 = raw.parse().map_err(|_| IngestError::BadCount {
            line,
            value: raw.to_string(),
        })?;
        if value <= 0 {
            return Err(IngestError::NonPositiveCount { line, value });
        }
        let i = intern(citing);
        let j = intern(cited);
        if seen.insert((i, j), ()).is_some() {
            return Err(IngestError::Duplicate {
                line,
                citing: citing.to_string(),
                cited: cited.to_string(),
            });
        }
        entries.push((i, j, value as u64));
    }
    CitationMatrix::from_entries(labels, entries)
}

/// Read a CSV edge list from disk, inflating it first when the name ends in `.gz`.
pub fn read_citation_file(path: &Path) -> Result<CitationMatrix, IngestError> {
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "gz") {
        parse_citation_csv(GzDecoder::new(file))
    } else {
        parse_citation_csv(file)
    }
}

/// Order entries so that parsing them back assigns the same dense indices:
/// each journal is introduced by one entry linking it to already-seen
/// journals, and everything else follows in row-major order. Returns `None`
/// when some journal cannot be introduced in index order (for example an
/// isolated journal).
fn introduction_order(m: &CitationMatrix) -> Option<Vec<(usize, usize, u64)>> {
    let n = m.n();
    let mut cited_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in m.entries() {
        if i < j {
            cited_by[j].push(i);
        }
    }
    let mut order = Vec::with_capacity(m.nnz());
    let mut used = std::collections::HashSet::new();
    let mut introduced = 0;
    for (k, citers) in cited_by.iter().enumerate() {
        if k < introduced {
            continue;
        }
        let pick = if let Some(&(j, _)) = m.row(k).iter().find(|&&(j, _)| j as usize <= k) {
            introduced = k + 1;
            (k, j as usize)
        } else if let Some(&i) = citers.first() {
            introduced = k + 1;
            (i, k)
        } else if k + 1 < n && m.get(k, k + 1) > 0 {
            introduced = k + 2;
            (k, k + 1)
        } else {
            return None;
        };
        used.insert(pick);
        order.push((pick.0, pick.1, m.get(pick.0, pick.1)));
    }
    order.extend(m.entries().filter(|&(i, j, _)| !used.contains(&(i, j))));
    Some(order)
}

/// Write the matrix as a CSV edge list with header such that
/// [`parse_citation_csv`] reproduces it exactly.
pub fn write_citation_csv<W: Write>(m: &CitationMatrix, writer: W) -> io::Result<()> {
    let order = introduction_order(m).ok_or_else(|| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            "matrix has journals that an edge list cannot introduce in index order",
        )
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["citing", "cited", "count"])?;
    for (i, j, c) in order {
        w.write_record([m.label(i), m.label(j), &c.to_string()])?;
    }
    w.flush()
}
