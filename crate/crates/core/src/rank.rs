//! Rank vectors, the per-sweep update kernel, and norm reductions.
//!
//! Ranks are pulled: each vertex reads its in-neighbors from the transpose
//! and writes only its own entry, so a sweep needs no atomics. Two buffers
//! are kept (synchronous iteration); a sweep reads `previous` and writes
//! every entry of `current` exactly once.
//!
//! Two rank formulas are available. [`UpdateMode::Plain`] is the usual
//!
//! > r(v) = (1 − α)/|V| + α · Σ_{u → v} R(u) / outdeg(u)
//!
//! [`UpdateMode::ClosedLoopPrune`] solves that equation for the vertex's own
//! self-loop term, treating every other in-neighbor as fixed:
//!
//! > r(v) = ((1 − α)/|V| + α · (c − R(v)/d)) / (1 − α/d)
//!
//! where `c` is the in-neighbor sum above and `d = outdeg(v)`. Both formulas
//! share the same fixed point.

use rayon::prelude::*;
use thiserror::Error;

use crate::frontier::{AffectedFlags, Schedule};
use crate::graph::{CsrGraph, VertexId};
use crate::partition::DEFAULT_LOW_DEGREE_THRESHOLD;
use crate::sync_slice::DisjointSlice;

/// In-edges per partial sum on the cooperative path.
const RANK_CHUNK: usize = 1024;
/// Elements per partial sum in [`l1_norm_delta`]. Fixed so the summation
/// order does not depend on the thread count.
const NORM_CHUNK: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("rank vectors need at least one vertex")]
    EmptyGraph,
    #[error("rank vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
}

/// How vertices are split between the per-task and cooperative paths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PartitionStrategy {
    /// Test each vertex's degree inline, for both rank updates and marking.
    DontPartition,
    /// Partition by in-degree for rank updates; marking tests inline.
    PartitionTranspose,
    /// Partition by in-degree for rank updates and by out-degree for marking.
    #[default]
    PartitionBoth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateMode {
    Plain,
    ClosedLoopPrune,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub damping: f64,
    /// L∞ iteration tolerance.
    pub iteration_tolerance: f64,
    /// Relative change above which a vertex's out-neighbors become affected.
    pub frontier_tolerance: f64,
    /// Relative change at or below which a vertex is pruned (closed-loop mode).
    pub prune_tolerance: f64,
    pub max_iterations: usize,
    pub low_degree_threshold: usize,
    pub partition_strategy: PartitionStrategy,
    /// When false, every run performs exactly `max_iterations` sweeps.
    pub check_convergence: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            iteration_tolerance: 1e-10,
            frontier_tolerance: 1e-6,
            prune_tolerance: 1e-6,
            max_iterations: 500,
            low_degree_threshold: DEFAULT_LOW_DEGREE_THRESHOLD,
            partition_strategy: PartitionStrategy::default(),
            check_convergence: true,
        }
    }
}

impl EngineConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), RankError> {
        let bad = |msg: &str| Err(RankError::InvalidConfig(msg.to_string()));
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad("damping factor must lie in (0, 1)");
        }
        if !(self.iteration_tolerance > 0.0) {
            return bad("iteration tolerance must be positive");
        }
        if !(self.frontier_tolerance >= 0.0) || !(self.prune_tolerance >= 0.0) {
            return bad("frontier and prune tolerances must be non-negative");
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be positive");
        }
        Ok(())
    }
}

/// Double-buffered rank vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RankState {
    previous: Vec<f64>,
    current: Vec<f64>,
}

impl RankState {
    pub fn uniform(vertex_count: usize) -> Result<Self, RankError> {
        if vertex_count == 0 {
            return Err(RankError::EmptyGraph);
        }
        let r = 1.0 / vertex_count as f64;
        Ok(Self {
            previous: vec![r; vertex_count],
            current: vec![r; vertex_count],
        })
    }

    pub fn from_ranks(ranks: &[f64]) -> Result<Self, RankError> {
        if ranks.is_empty() {
            return Err(RankError::EmptyGraph);
        }
        Ok(Self {
            previous: ranks.to_vec(),
            current: ranks.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.previous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.previous.is_empty()
    }

    pub fn previous(&self) -> &[f64] {
        &self.previous
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.previous, &mut self.current);
    }

    /// L∞ distance between the two buffers.
    pub fn delta(&self) -> f64 {
        linf_max(&self.current, &self.previous)
    }

    pub fn into_previous(self) -> Vec<f64> {
        self.previous
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), RankError> {
    if a.len() != b.len() {
        return Err(RankError::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

fn linf_max(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter()
        .zip(b.par_iter())
        .with_min_len(NORM_CHUNK)
        .map(|(x, y)| (x - y).abs())
        .reduce(|| 0.0, f64::max)
}

/// `max_v |a[v] − b[v]|`.
pub fn linf_norm_delta(a: &[f64], b: &[f64]) -> Result<f64, RankError> {
    check_lengths(a, b)?;
    Ok(linf_max(a, b))
}

/// `Σ_v |a[v] − b[v]|`, summed in fixed-size chunks whose partial sums are
/// then added in order.
pub fn l1_norm_delta(a: &[f64], b: &[f64]) -> Result<f64, RankError> {
    check_lengths(a, b)?;
    let partials: Vec<f64> = a
        .par_chunks(NORM_CHUNK)
        .zip(b.par_chunks(NORM_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .collect();
    Ok(partials.iter().sum())
}

#[inline]
fn contribution(forward: &CsrGraph, previous: &[f64], sources: &[VertexId]) -> f64 {
    sources
        .iter()
        .map(|&u| {
            let d = forward.degree(u);
            debug_assert!(d > 0, "vertex {u} is a dead end");
            previous[u as usize] / d as f64
        })
        .sum()
}

#[inline]
fn contribution_cooperative(forward: &CsrGraph, previous: &[f64], sources: &[VertexId]) -> f64 {
    let partials: Vec<f64> = sources
        .par_chunks(RANK_CHUNK)
        .map(|chunk| contribution(forward, previous, chunk))
        .collect();
    partials.iter().sum()
}

/// Relative change `|r − old| / max(r, old)`, defined as 0 when both are 0.
#[inline]
pub fn relative_change(new: f64, old: f64) -> f64 {
    let denom = new.max(old);
    if denom > 0.0 {
        (new - old).abs() / denom
    } else {
        0.0
    }
}

/// Rank of `v` under `mode`, given its in-neighbor sum `c`.
#[inline]
pub fn vertex_rank(
    mode: UpdateMode,
    damping: f64,
    vertex_count: usize,
    in_sum: f64,
    own_previous: f64,
    own_out_degree: usize,
) -> f64 {
    let base = (1.0 - damping) / vertex_count as f64;
    match mode {
        UpdateMode::Plain => base + damping * in_sum,
        UpdateMode::ClosedLoopPrune => {
            let d = own_out_degree as f64;
            (base + damping * (in_sum - own_previous / d)) / (1.0 - damping / d)
        }
    }
}

/// One synchronous sweep: reads `state.previous()`, writes every entry of
/// `state.current()`, and returns how many vertices were actually recomputed.
///
/// Without flags every vertex is recomputed. With flags, unaffected vertices
/// copy their previous rank through; affected ones set their pending flag
/// when their relative change exceeds the frontier tolerance and, in
/// closed-loop mode, clear their own affected flag when it is within the
/// prune tolerance.
///
/// `schedule` must split vertices by in-degree (a partition of `transpose`,
/// or an inline threshold).
pub fn update_ranks(
    flags: Option<&AffectedFlags>,
    state: &mut RankState,
    transpose: &CsrGraph,
    forward: &CsrGraph,
    schedule: Schedule<'_>,
    config: &EngineConfig,
    mode: UpdateMode,
) -> usize {
    let n = transpose.vertex_count();
    debug_assert_eq!(state.len(), n);
    let RankState { previous, current } = state;
    let previous: &[f64] = previous;
    let out = DisjointSlice::new(current);

    let visit = |v: VertexId, cooperative: bool| -> usize {
        let i = v as usize;
        if let Some(flags) = flags {
            if !flags.is_affected(v) {
                // SAFETY: each vertex id appears once per sweep.
                unsafe { out.write(i, previous[i]) };
                return 0;
            }
        }
        let sources = transpose.neighbors(v);
        let in_sum = if cooperative {
            contribution_cooperative(forward, previous, sources)
        } else {
            contribution(forward, previous, sources)
        };
        let r = vertex_rank(
            mode,
            config.damping,
            n,
            in_sum,
            previous[i],
            forward.degree(v),
        );
        if let Some(flags) = flags {
            let change = relative_change(r, previous[i]);
            if mode == UpdateMode::ClosedLoopPrune && change <= config.prune_tolerance {
                flags.clear_affected(v);
            }
            if change > config.frontier_tolerance {
                flags.mark_pending(v);
            }
        }
        // SAFETY: as above.
        unsafe { out.write(i, r) };
        1
    };

    match schedule {
        Schedule::Partitioned(partition) => {
            debug_assert_eq!(partition.order().len(), n);
            let low: usize = partition
                .low()
                .par_iter()
                .with_min_len(256)
                .map(|&v| visit(v, false))
                .sum();
            let high: usize = partition.high().par_iter().map(|&v| visit(v, true)).sum();
            low + high
        }
        Schedule::Inline { threshold } => (0..n as VertexId)
            .into_par_iter()
            .with_min_len(256)
            .map(|v| visit(v, transpose.degree(v) > threshold))
            .sum(),
    }
}
