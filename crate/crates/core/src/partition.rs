//! Splitting vertices into low-degree and high-degree groups.
//!
//! Low-degree vertices are cheap enough to be handled one task per vertex;
//! high-degree vertices get a cooperative, chunked reduction. The split is a
//! flag array, an exclusive scan, and a scatter, done once for each group so
//! that both groups keep ascending id order.

use rayon::prelude::*;

use crate::graph::{CsrGraph, VertexId};

/// Default maximum degree of a "low-degree" vertex.
pub const DEFAULT_LOW_DEGREE_THRESHOLD: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreePartition {
    order: Vec<VertexId>,
    low_count: usize,
}

impl DegreePartition {
    /// Vertex ids, low-degree group first.
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn low_count(&self) -> usize {
        self.low_count
    }

    pub fn low(&self) -> &[VertexId] {
        &self.order[..self.low_count]
    }

    pub fn high(&self) -> &[VertexId] {
        &self.order[self.low_count..]
    }
}

/// Replaces `buffer[i]` by the sum of `buffer[..i]` and returns the total.
pub fn exclusive_scan(buffer: &mut [usize]) -> usize {
    let mut running = 0;
    for slot in buffer.iter_mut() {
        let value = *slot;
        *slot = running;
        running += value;
    }
    running
}

/// Partitions the vertices of `graph` by the length of their adjacency slice.
///
/// Pass the forward graph to split by out-degree, the transpose to split by
/// in-degree.
pub fn partition_by_degree(graph: &CsrGraph, threshold: usize) -> DegreePartition {
    partition_by(graph.vertex_count(), |v| graph.degree(v), threshold)
}

fn partition_by<F>(n: usize, degree: F, threshold: usize) -> DegreePartition
where
    F: Fn(VertexId) -> usize + Sync,
{
    let mut order = vec![0 as VertexId; n];
    let mut buffer = vec![0usize; n + 1];

    buffer[..n]
        .par_iter_mut()
        .enumerate()
        .for_each(|(v, flag)| *flag = usize::from(degree(v as VertexId) <= threshold));
    buffer[n] = 0;
    exclusive_scan(&mut buffer);
    let low_count = buffer[n];
    for v in 0..n {
        if degree(v as VertexId) <= threshold {
            order[buffer[v]] = v as VertexId;
        }
    }

    buffer[..n]
        .par_iter_mut()
        .enumerate()
        .for_each(|(v, flag)| *flag = usize::from(degree(v as VertexId) > threshold));
    buffer[n] = 0;
    exclusive_scan(&mut buffer);
    for v in 0..n {
        if degree(v as VertexId) > threshold {
            order[low_count + buffer[v]] = v as VertexId;
        }
    }

    DegreePartition { order, low_count }
}
