//! Immutable compressed sparse row graphs and batch updates.
//!
//! A [`CsrGraph`] stores, for each vertex `v`, the half-open range
//! `offsets[v]..offsets[v + 1]` into a flat `targets` array. Target slices
//! are kept sorted and free of duplicates, which makes structural equality
//! meaningful and lets edge lookups use binary search.
//!
//! The same type holds both a graph and its transpose: for the transpose the
//! slices list in-neighbors instead of out-neighbors.

use rayon::prelude::*;
use thiserror::Error;

/// Dense vertex identifier in `0..vertex_count`.
pub type VertexId = u32;

/// A directed edge `(source, target)`.
pub type Edge = (VertexId, VertexId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({src}, {dst}) references a vertex outside 0..{vertex_count}")]
    VertexOutOfRange {
        src: VertexId,
        dst: VertexId,
        vertex_count: usize,
    },
    #[error("vertex count {0} does not fit in a 32-bit vertex id")]
    TooManyVertices(usize),
    #[error("batch deletes self-loop ({0}, {0}); self-loops are permanent")]
    SelfLoopDeletion(VertexId),
    #[error("edge ({0}, {1}) is both deleted and inserted by the same batch")]
    ConflictingUpdate(VertexId, VertexId),
    #[error("malformed CSR: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CsrGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Default for CsrGraph {
    fn default() -> Self {
        Self {
            offsets: vec![0],
            targets: Vec::new(),
        }
    }
}

impl CsrGraph {
    /// Builds a graph from an arbitrary edge list. Duplicate edges collapse
    /// into one.
    pub fn from_edges(edges: &[Edge], vertex_count: usize) -> Result<Self, GraphError> {
        check_vertex_count(vertex_count)?;
        for &(source, target) in edges {
            if source as usize >= vertex_count || target as usize >= vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    src: source,
                    dst: target,
                    vertex_count,
                });
            }
        }

        let mut offsets = vec![0usize; vertex_count + 1];
        for &(source, _) in edges {
            offsets[source as usize + 1] += 1;
        }
        for v in 0..vertex_count {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0 as VertexId; edges.len()];
        for &(source, target) in edges {
            let slot = &mut cursor[source as usize];
            targets[*slot] = target;
            *slot += 1;
        }

        let mut unique = vec![0usize; vertex_count];
        split_by_offsets(&mut targets, &offsets)
            .into_par_iter()
            .zip(unique.par_iter_mut())
            .for_each(|(slice, unique)| {
                slice.sort_unstable();
                let mut kept = 0;
                for i in 0..slice.len() {
                    if i == 0 || slice[i] != slice[kept - 1] {
                        slice[kept] = slice[i];
                        kept += 1;
                    }
                }
                *unique = kept;
            });

        let mut compact_offsets = Vec::with_capacity(vertex_count + 1);
        compact_offsets.push(0);
        let mut compact = Vec::with_capacity(unique.iter().sum());
        for v in 0..vertex_count {
            let start = offsets[v];
            compact.extend_from_slice(&targets[start..start + unique[v]]);
            compact_offsets.push(compact.len());
        }

        Ok(Self {
            offsets: compact_offsets,
            targets: compact,
        })
    }

    /// Wraps raw CSR arrays after checking every structural invariant.
    pub fn from_raw_parts(offsets: Vec<usize>, targets: Vec<VertexId>) -> Result<Self, GraphError> {
        let graph = Self { offsets, targets };
        graph.validate()?;
        Ok(graph)
    }

    /// Checks offsets, target bounds, and per-slice ordering.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.vertex_count();
        check_vertex_count(n)?;
        if self.offsets.first() != Some(&0) {
            return Err(GraphError::Malformed("offsets[0] must be 0".into()));
        }
        if *self.offsets.last().unwrap() != self.targets.len() {
            return Err(GraphError::Malformed(
                "last offset must equal the number of edges".into(),
            ));
        }
        for v in 0..n {
            if self.offsets[v] > self.offsets[v + 1] {
                return Err(GraphError::Malformed(format!(
                    "offsets decrease at vertex {v}"
                )));
            }
            let slice = self.neighbors(v as VertexId);
            if slice.iter().any(|&t| t as usize >= n) {
                return Err(GraphError::Malformed(format!(
                    "vertex {v} has a target outside 0..{n}"
                )));
            }
            if slice.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::Malformed(format!(
                    "targets of vertex {v} are not strictly increasing"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, source: VertexId, target: VertexId) -> bool {
        (source as usize) < self.vertex_count()
            && self.neighbors(source).binary_search(&target).is_ok()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[VertexId] {
        &self.targets
    }

    /// All edges in CSR order (by source, then target).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.vertex_count() as VertexId)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Returns the graph with every edge reversed.
    ///
    /// Sources are scanned in ascending order, so the resulting slices come
    /// out sorted without a separate sort pass.
    pub fn transpose(&self) -> Self {
        let n = self.vertex_count();
        let mut offsets = vec![0usize; n + 1];
        for &t in &self.targets {
            offsets[t as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0 as VertexId; self.targets.len()];
        for (u, v) in self.edges() {
            let slot = &mut cursor[v as usize];
            targets[*slot] = u;
            *slot += 1;
        }
        Self { offsets, targets }
    }

    /// Returns the graph with an edge `(v, v)` on every vertex. Idempotent.
    pub fn with_self_loops(&self) -> Self {
        let n = self.vertex_count();
        let missing = (0..n as VertexId)
            .filter(|&v| !self.has_edge(v, v))
            .count();
        if missing == 0 {
            return self.clone();
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(self.targets.len() + missing);
        offsets.push(0);
        for v in 0..n as VertexId {
            let slice = self.neighbors(v);
            match slice.binary_search(&v) {
                Ok(_) => targets.extend_from_slice(slice),
                Err(at) => {
                    targets.extend_from_slice(&slice[..at]);
                    targets.push(v);
                    targets.extend_from_slice(&slice[at..]);
                }
            }
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    /// Produces the next snapshot: `(E \ deletions) ∪ insertions`, with
    /// self-loops re-ensured on every vertex.
    ///
    /// Deleting an absent edge and inserting a present one are both no-ops;
    /// they are counted in the returned diagnostics.
    pub fn apply_batch(&self, batch: &BatchUpdate) -> Result<(Self, BatchDiagnostics), GraphError> {
        let n = self.vertex_count();
        batch.validate(n)?;

        let mut deletions = batch.deletions.clone();
        deletions.sort_unstable();
        deletions.dedup();
        let mut insertions = batch.insertions.clone();
        insertions.sort_unstable();
        insertions.dedup();

        let mut diagnostics = BatchDiagnostics::default();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(self.edge_count() + insertions.len() + n);
        offsets.push(0);

        let (mut di, mut ii) = (0, 0);
        let mut merged: Vec<VertexId> = Vec::new();
        for u in 0..n as VertexId {
            let del_start = di;
            while di < deletions.len() && deletions[di].0 == u {
                di += 1;
            }
            let ins_start = ii;
            while ii < insertions.len() && insertions[ii].0 == u {
                ii += 1;
            }
            let removed = &deletions[del_start..di];
            let added = &insertions[ins_start..ii];
            let current = self.neighbors(u);

            for &(_, v) in removed {
                if current.binary_search(&v).is_err() {
                    diagnostics.missing_deletions += 1;
                }
            }
            for &(_, v) in added {
                if current.binary_search(&v).is_ok() {
                    diagnostics.redundant_insertions += 1;
                }
            }

            // Merge the sorted slice, the sorted insertions, and the self-loop,
            // skipping anything in the sorted deletions.
            merged.clear();
            let mut r = 0;
            let kept = current.iter().copied().filter(|v| {
                while r < removed.len() && removed[r].1 < *v {
                    r += 1;
                }
                !(r < removed.len() && removed[r].1 == *v)
            });
            merged.extend(kept);
            merged.extend(added.iter().map(|&(_, v)| v));
            merged.push(u);
            merged.sort_unstable();
            merged.dedup();

            targets.extend_from_slice(&merged);
            offsets.push(targets.len());
        }

        Ok((Self { offsets, targets }, diagnostics))
    }
}

fn check_vertex_count(n: usize) -> Result<(), GraphError> {
    if n > VertexId::MAX as usize {
        return Err(GraphError::TooManyVertices(n));
    }
    Ok(())
}

/// Splits `data` into one mutable slice per vertex range.
fn split_by_offsets<'a, T>(mut data: &'a mut [T], offsets: &[usize]) -> Vec<&'a mut [T]> {
    let mut slices = Vec::with_capacity(offsets.len().saturating_sub(1));
    for w in offsets.windows(2) {
        let (head, tail) = data.split_at_mut(w[1] - w[0]);
        slices.push(head);
        data = tail;
    }
    slices
}

/// Edge deletions and insertions that turn one snapshot into the next.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchUpdate {
    pub deletions: Vec<Edge>,
    pub insertions: Vec<Edge>,
}

impl BatchUpdate {
    pub fn new(deletions: Vec<Edge>, insertions: Vec<Edge>) -> Self {
        Self {
            deletions,
            insertions,
        }
    }

    pub fn insertions_only(insertions: Vec<Edge>) -> Self {
        Self {
            deletions: Vec::new(),
            insertions,
        }
    }

    pub fn len(&self) -> usize {
        self.deletions.len() + self.insertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deletions.is_empty() && self.insertions.is_empty()
    }

    pub fn validate(&self, vertex_count: usize) -> Result<(), GraphError> {
        for &(source, target) in self.deletions.iter().chain(&self.insertions) {
            if source as usize >= vertex_count || target as usize >= vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    src: source,
                    dst: target,
                    vertex_count,
                });
            }
        }
        if let Some(&(v, _)) = self.deletions.iter().find(|(u, v)| u == v) {
            return Err(GraphError::SelfLoopDeletion(v));
        }
        if !self.deletions.is_empty() && !self.insertions.is_empty() {
            let mut deleted = self.deletions.clone();
            deleted.sort_unstable();
            if let Some(&(u, v)) = self
                .insertions
                .iter()
                .find(|e| deleted.binary_search(e).is_ok())
            {
                return Err(GraphError::ConflictingUpdate(u, v));
            }
        }
        Ok(())
    }
}

/// No-op tallies from [`CsrGraph::apply_batch`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchDiagnostics {
    pub missing_deletions: usize,
    pub redundant_insertions: usize,
}
