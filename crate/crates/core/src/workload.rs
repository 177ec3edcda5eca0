//! Dataset loaders and batch-update generators.
//!
//! Two input formats are read: MatrixMarket coordinate files for static
//! graphs, and SNAP-style temporal edge lists (`src dst timestamp` per line).
//! Two update protocols are produced: consecutive slices of a temporal edge
//! stream, and random 80/20 insertion/deletion mixes over a static graph.
//!
//! Random batches draw from SplitMix64 (64-bit state) and map each draw onto
//! `0..n` as `(x · n) >> 64`, so a seed reproduces the same batch on any
//! platform.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::graph::{BatchUpdate, CsrGraph, Edge, VertexId};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Sizing(String),
}

fn parse_error(line: usize, message: impl Into<String>) -> WorkloadError {
    WorkloadError::Parse {
        line,
        message: message.into(),
    }
}

/// A plain edge list over dense vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
    pub vertex_count: usize,
}

/// Reads a MatrixMarket coordinate file as a directed graph.
///
/// Ids are converted from 1-based to 0-based, values are ignored, and
/// symmetric storage is expanded into both directions. The vertex count is
/// the larger of the row and column dimensions.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<EdgeList, WorkloadError> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

pub fn read_matrix_market(reader: impl BufRead) -> Result<EdgeList, WorkloadError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(|f| f.to_ascii_lowercase())
        .collect();
    if fields.len() < 4 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_error(1, "expected a `%%MatrixMarket matrix ...` header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_error(
            1,
            format!("unsupported format `{}`; only coordinate is read", fields[2]),
        ));
    }
    let symmetric = match fields.get(4).map(String::as_str) {
        None | Some("general") => false,
        Some("symmetric") | Some("skew-symmetric") | Some("hermitian") => true,
        Some(other) => return Err(parse_error(1, format!("unknown symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = 0usize;
    for (number, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let mut next_index = |what: &str| -> Result<usize, WorkloadError> {
            parts
                .next()
                .ok_or_else(|| parse_error(number, format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| parse_error(number, format!("bad {what}: {e}")))
        };
        match size {
            None => {
                let rows = next_index("row count")?;
                let cols = next_index("column count")?;
                let nnz = next_index("entry count")?;
                if rows.max(cols) > VertexId::MAX as usize {
                    return Err(parse_error(number, "too many vertices for 32-bit ids"));
                }
                size = Some((rows, cols, nnz));
                edges.reserve(if symmetric { 2 * nnz } else { nnz });
            }
            Some((rows, cols, nnz)) => {
                if seen == nnz {
                    return Err(parse_error(number, format!("more than the declared {nnz} entries")));
                }
                let i = next_index("row index")?;
                let j = next_index("column index")?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(parse_error(
                        number,
                        format!("entry ({i}, {j}) outside the declared {rows}x{cols} bounds"),
                    ));
                }
                let (u, v) = ((i - 1) as VertexId, (j - 1) as VertexId);
                edges.push((u, v));
                if symmetric && u != v {
                    edges.push((v, u));
                }
                seen += 1;
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_error(1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_error(
            1,
            format!("declared {nnz} entries but found {seen}"),
        ));
    }
    Ok(EdgeList {
        edges,
        vertex_count: rows.max(cols),
    })
}

/// Writes `edges` as a general pattern MatrixMarket file.
pub fn write_matrix_market(list: &EdgeList, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate pattern general")?;
    writeln!(out, "{} {} {}", list.vertex_count, list.vertex_count, list.edges.len())?;
    for &(u, v) in &list.edges {
        writeln!(out, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemporalEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub timestamp: i64,
}

/// Timestamped edges in ascending time order. Repeated pairs are kept.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TemporalEdgeList {
    pub entries: Vec<TemporalEdge>,
    pub vertex_count: usize,
}

impl TemporalEdgeList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_temporal_edge_list(path: impl AsRef<Path>) -> Result<TemporalEdgeList, WorkloadError> {
    read_temporal_edge_list(BufReader::new(File::open(path)?))
}

/// Reads `src dst timestamp` lines, skipping blanks and `#`/`%` comments.
///
/// Original ids are compacted to `0..n` in ascending order of the original
/// id, and entries are stably sorted by timestamp.
pub fn read_temporal_edge_list(reader: impl BufRead) -> Result<TemporalEdgeList, WorkloadError> {
    let mut raw: Vec<(u64, u64, i64)> = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let number = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let mut field = |what: &str| {
            parts
                .next()
                .ok_or_else(|| parse_error(number, format!("missing {what}")))
        };
        let src = field("source")?;
        let dst = field("target")?;
        let ts = field("timestamp")?;
        let src = src
            .parse::<u64>()
            .map_err(|e| parse_error(number, format!("bad source `{src}`: {e}")))?;
        let dst = dst
            .parse::<u64>()
            .map_err(|e| parse_error(number, format!("bad target `{dst}`: {e}")))?;
        let ts = ts
            .parse::<i64>()
            .map_err(|e| parse_error(number, format!("bad timestamp `{ts}`: {e}")))?;
        raw.push((src, dst, ts));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(s, d, _)| [s, d]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > VertexId::MAX as usize {
        return Err(WorkloadError::Sizing(format!(
            "{} distinct vertices exceed 32-bit ids",
            ids.len()
        )));
    }
    let dense: HashMap<u64, VertexId> = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i as VertexId))
        .collect();

    let mut entries: Vec<TemporalEdge> = raw
        .into_iter()
        .map(|(s, d, timestamp)| TemporalEdge {
            source: dense[&s],
            target: dense[&d],
            timestamp,
        })
        .collect();
    entries.sort_by_key(|e| e.timestamp);
    Ok(TemporalEdgeList {
        entries,
        vertex_count: ids.len(),
    })
}

pub fn write_temporal_edge_list(list: &TemporalEdgeList, mut out: impl Write) -> io::Result<()> {
    for e in &list.entries {
        writeln!(out, "{} {} {}", e.source, e.target, e.timestamp)?;
    }
    Ok(())
}

/// `fraction · total`, rounded half-up, at least 1.
pub fn batch_size_for(fraction: f64, total: usize) -> usize {
    ((fraction * total as f64 + 0.5).floor() as usize).max(1)
}

/// A base graph plus the consecutive insertion batches that follow it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalSplit {
    /// Distinct edges of the base prefix.
    pub base: Vec<Edge>,
    pub batches: Vec<BatchUpdate>,
}

/// Splits a temporal stream into a base prefix of
/// `⌊base_fraction · |E_T|⌋` entries and `batch_count` consecutive batches
/// of `batch_size` entries each. Entries past the last batch are unused.
pub fn split_temporal(
    list: &TemporalEdgeList,
    base_fraction: f64,
    batch_count: usize,
    batch_size: usize,
) -> Result<TemporalSplit, WorkloadError> {
    if !(base_fraction > 0.0 && base_fraction < 1.0) {
        return Err(WorkloadError::Sizing(format!(
            "base fraction {base_fraction} must lie in (0, 1)"
        )));
    }
    if batch_size == 0 {
        return Err(WorkloadError::Sizing("batch size must be positive".into()));
    }
    let total = list.len();
    let base_len = (base_fraction * total as f64).floor() as usize;
    let available = total - base_len;
    if batch_count * batch_size > available {
        return Err(WorkloadError::Sizing(format!(
            "{batch_count} batches of {batch_size} need {} entries after the base, \
             but only {available} remain; {} batches fit",
            batch_count * batch_size,
            available / batch_size
        )));
    }

    let mut base: Vec<Edge> = list.entries[..base_len]
        .iter()
        .map(|e| (e.source, e.target))
        .collect();
    base.sort_unstable();
    base.dedup();

    let batches = list.entries[base_len..base_len + batch_count * batch_size]
        .chunks(batch_size)
        .map(|chunk| {
            BatchUpdate::insertions_only(chunk.iter().map(|e| (e.source, e.target)).collect())
        })
        .collect();
    Ok(TemporalSplit { base, batches })
}

/// Uniform index in `0..bound` from one 64-bit draw.
#[inline]
fn bounded(rng: &mut SplitMix64, bound: usize) -> usize {
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}

/// Attempts allowed per requested insertion before giving up.
const INSERTION_ATTEMPTS_PER_EDGE: usize = 100;

/// A random batch of `⌈insert_fraction · total⌉` insertions between
/// uniformly drawn vertex pairs and the remaining count of deletions drawn
/// uniformly, without replacement, from the non-loop edges of `graph`.
///
/// Insertions never duplicate an existing edge, a self-loop, or each other.
pub fn generate_random_batch(
    graph: &CsrGraph,
    total: usize,
    insert_fraction: f64,
    seed: u64,
) -> Result<BatchUpdate, WorkloadError> {
    if total == 0 {
        return Err(WorkloadError::Sizing("batch size must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&insert_fraction) {
        return Err(WorkloadError::Sizing(format!(
            "insert fraction {insert_fraction} must lie in [0, 1]"
        )));
    }
    // The epsilon keeps products such as 0.8 · 5 from rounding up past 4.
    let insert_count = ((insert_fraction * total as f64 - 1e-9).ceil().max(0.0) as usize).min(total);
    let delete_count = total - insert_count;

    let candidates: Vec<Edge> = graph.edges().filter(|(u, v)| u != v).collect();
    if delete_count > candidates.len() {
        return Err(WorkloadError::Sizing(format!(
            "{delete_count} deletions requested but the graph has only {} non-loop edges",
            candidates.len()
        )));
    }

    let n = graph.vertex_count();
    let mut rng = SplitMix64::seed_from_u64(seed);

    let mut insertions = Vec::with_capacity(insert_count);
    let mut chosen: HashSet<Edge> = HashSet::with_capacity(insert_count);
    let mut attempts = 0;
    while insertions.len() < insert_count {
        if attempts == INSERTION_ATTEMPTS_PER_EDGE * insert_count {
            return Err(WorkloadError::Sizing(format!(
                "found only {} of {insert_count} insertable vertex pairs in {attempts} attempts",
                insertions.len()
            )));
        }
        attempts += 1;
        let u = bounded(&mut rng, n) as VertexId;
        let v = bounded(&mut rng, n) as VertexId;
        if u == v || graph.has_edge(u, v) || !chosen.insert((u, v)) {
            continue;
        }
        insertions.push((u, v));
    }

    // Partial Fisher-Yates over the candidate list.
    let mut pool = candidates;
    for i in 0..delete_count {
        let j = i + bounded(&mut rng, pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(delete_count);

    Ok(BatchUpdate::new(pool, insertions))
}
