//! Affected-vertex bookkeeping for the dynamic drivers.
//!
//! Two byte flags are kept per vertex: whether the vertex itself must be
//! reprocessed, and whether its out-neighbors are waiting to be marked.
//! Marking only ever stores the value 1, so concurrent writers to the same
//! byte agree on the outcome; relaxed atomics make that explicit.

use std::sync::atomic::{AtomicU8, Ordering};

use rayon::prelude::*;

use crate::graph::{BatchUpdate, CsrGraph, GraphError, VertexId};
use crate::partition::DegreePartition;

/// Out-degree above which a vertex's neighbors are marked in parallel chunks.
const MARK_CHUNK: usize = 1024;

#[derive(Debug)]
pub struct AffectedFlags {
    vertex_affected: Vec<AtomicU8>,
    neighbors_pending: Vec<AtomicU8>,
}

impl AffectedFlags {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_affected: (0..vertex_count).map(|_| AtomicU8::new(0)).collect(),
            neighbors_pending: (0..vertex_count).map(|_| AtomicU8::new(0)).collect(),
        }
    }

    /// Every vertex affected, nothing pending.
    pub fn all_affected(vertex_count: usize) -> Self {
        let flags = Self::new(vertex_count);
        for f in &flags.vertex_affected {
            f.store(1, Ordering::Relaxed);
        }
        flags
    }

    pub fn len(&self) -> usize {
        self.vertex_affected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_affected.is_empty()
    }

    #[inline]
    pub fn is_affected(&self, v: VertexId) -> bool {
        self.vertex_affected[v as usize].load(Ordering::Relaxed) != 0
    }

    #[inline]
    pub fn mark_affected(&self, v: VertexId) {
        self.vertex_affected[v as usize].store(1, Ordering::Relaxed);
    }

    #[inline]
    pub fn clear_affected(&self, v: VertexId) {
        self.vertex_affected[v as usize].store(0, Ordering::Relaxed);
    }

    #[inline]
    pub fn is_pending(&self, v: VertexId) -> bool {
        self.neighbors_pending[v as usize].load(Ordering::Relaxed) != 0
    }

    #[inline]
    pub fn mark_pending(&self, v: VertexId) {
        self.neighbors_pending[v as usize].store(1, Ordering::Relaxed);
    }

    pub fn clear_pending(&self) {
        self.neighbors_pending
            .par_iter()
            .for_each(|f| f.store(0, Ordering::Relaxed));
    }

    pub fn affected_count(&self) -> usize {
        self.vertex_affected
            .par_iter()
            .filter(|f| f.load(Ordering::Relaxed) != 0)
            .count()
    }

    /// Snapshot of the vertex-affected bytes.
    pub fn affected_bytes(&self) -> Vec<u8> {
        self.vertex_affected
            .iter()
            .map(|f| f.load(Ordering::Relaxed))
            .collect()
    }

    /// Snapshot of the neighbors-pending bytes.
    pub fn pending_bytes(&self) -> Vec<u8> {
        self.neighbors_pending
            .iter()
            .map(|f| f.load(Ordering::Relaxed))
            .collect()
    }

    fn check(&self, source: VertexId, target: VertexId) -> Result<(), GraphError> {
        let vertex_count = self.len();
        if source as usize >= vertex_count || target as usize >= vertex_count {
            return Err(GraphError::VertexOutOfRange {
                src: source,
                dst: target,
                vertex_count,
            });
        }
        Ok(())
    }
}

impl Clone for AffectedFlags {
    fn clone(&self) -> Self {
        let copy = |v: &Vec<AtomicU8>| {
            v.iter()
                .map(|f| AtomicU8::new(f.load(Ordering::Relaxed)))
                .collect()
        };
        Self {
            vertex_affected: copy(&self.vertex_affected),
            neighbors_pending: copy(&self.neighbors_pending),
        }
    }
}

/// Initial marking for a batch applied to `graph`.
///
/// Every update source gets its out-neighbors queued; the target of every
/// deletion is marked directly, since after the update it may no longer be
/// an out-neighbor of the source.
pub fn initial_affected(graph: &CsrGraph, batch: &BatchUpdate) -> Result<AffectedFlags, GraphError> {
    let flags = AffectedFlags::new(graph.vertex_count());
    for &(u, v) in batch.deletions.iter().chain(&batch.insertions) {
        flags.check(u, v)?;
    }
    batch.deletions.par_iter().for_each(|&(u, v)| {
        flags.mark_pending(u);
        flags.mark_affected(v);
    });
    batch
        .insertions
        .par_iter()
        .for_each(|&(u, _)| flags.mark_pending(u));
    Ok(flags)
}

/// How a per-vertex pass picks between the per-task and the cooperative path.
#[derive(Clone, Copy, Debug)]
pub enum Schedule<'a> {
    /// Walk a precomputed partition: low group first, then high group.
    Partitioned(&'a DegreePartition),
    /// Walk vertices in id order and test each degree inline.
    Inline { threshold: usize },
}

#[inline]
fn mark_neighbors(flags: &AffectedFlags, graph: &CsrGraph, u: VertexId) {
    for &v in graph.neighbors(u) {
        flags.mark_affected(v);
    }
}

#[inline]
fn mark_neighbors_cooperative(flags: &AffectedFlags, graph: &CsrGraph, u: VertexId) {
    graph
        .neighbors(u)
        .par_chunks(MARK_CHUNK)
        .for_each(|chunk| chunk.iter().for_each(|&v| flags.mark_affected(v)));
}

/// Marks the out-neighbors of every pending vertex as affected.
///
/// Pending flags are left untouched; the caller clears them before the next
/// rank sweep.
pub fn expand_affected(flags: &AffectedFlags, graph: &CsrGraph, schedule: Schedule<'_>) {
    match schedule {
        Schedule::Partitioned(partition) => {
            partition.low().par_iter().with_min_len(256).for_each(|&u| {
                if flags.is_pending(u) {
                    mark_neighbors(flags, graph, u);
                }
            });
            partition.high().par_iter().for_each(|&u| {
                if flags.is_pending(u) {
                    mark_neighbors_cooperative(flags, graph, u);
                }
            });
        }
        Schedule::Inline { threshold } => {
            (0..graph.vertex_count() as VertexId)
                .into_par_iter()
                .with_min_len(256)
                .for_each(|u| {
                    if !flags.is_pending(u) {
                        return;
                    }
                    if graph.degree(u) <= threshold {
                        mark_neighbors(flags, graph, u);
                    } else {
                        mark_neighbors_cooperative(flags, graph, u);
                    }
                });
        }
    }
}

/// Seeds for reachability-based marking: every update source plus every
/// deletion target.
pub fn traversal_seeds(batch: &BatchUpdate) -> Vec<VertexId> {
    let mut seeds: Vec<VertexId> = batch
        .deletions
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .chain(batch.insertions.iter().map(|&(u, _)| u))
        .collect();
    seeds.sort_unstable();
    seeds.dedup();
    seeds
}

/// Marks every vertex reachable from `seeds` (seeds included) with a
/// level-synchronous breadth-first search.
pub fn mark_reachable(graph: &CsrGraph, seeds: &[VertexId]) -> Result<AffectedFlags, GraphError> {
    let flags = AffectedFlags::new(graph.vertex_count());
    let mut frontier = Vec::with_capacity(seeds.len());
    for &s in seeds {
        flags.check(s, s)?;
        if !flags.is_affected(s) {
            flags.mark_affected(s);
            frontier.push(s);
        }
    }
    while !frontier.is_empty() {
        let mut next: Vec<VertexId> = frontier
            .par_iter()
            .flat_map_iter(|&u| graph.neighbors(u).iter().copied())
            .filter(|&v| {
                flags.vertex_affected[v as usize].swap(1, Ordering::Relaxed) == 0
            })
            .collect();
        next.sort_unstable();
        frontier = next;
    }
    Ok(flags)
}
