//! End-to-end PageRank drivers.
//!
//! All five approaches run the same synchronous loop: sweep, measure the L∞
//! change, swap buffers, stop at the iteration tolerance. They differ in the
//! starting vector and in which vertices a sweep recomputes:
//!
//! | approach | start    | recomputed vertices                              |
//! |----------|----------|--------------------------------------------------|
//! | static   | uniform  | all                                              |
//! | nd       | previous | all                                              |
//! | dt       | previous | reachable from the batch endpoints               |
//! | df       | previous | frontier grown from the update sites             |
//! | dfp      | previous | frontier, with pruning and the closed-loop rule  |

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::frontier::{self, AffectedFlags, Schedule};
use crate::graph::{BatchUpdate, CsrGraph, GraphError, VertexId};
use crate::partition::{partition_by_degree, DegreePartition};
use crate::rank::{update_ranks, EngineConfig, PartitionStrategy, RankError, RankState, UpdateMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("graph and transpose disagree: {0}")]
    NotTransposed(String),
    #[error("vertex {0} has no out-edges; add self-loops before ranking")]
    DeadEnd(VertexId),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph snapshot together with its transpose.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'g> {
    forward: &'g CsrGraph,
    transpose: &'g CsrGraph,
}

impl<'g> Snapshot<'g> {
    /// Spot-checks that the pair is consistent and free of dead ends.
    pub fn new(forward: &'g CsrGraph, transpose: &'g CsrGraph) -> Result<Self, EngineError> {
        if forward.vertex_count() != transpose.vertex_count() {
            return Err(EngineError::NotTransposed(format!(
                "{} vs {} vertices",
                forward.vertex_count(),
                transpose.vertex_count()
            )));
        }
        if forward.edge_count() != transpose.edge_count() {
            return Err(EngineError::NotTransposed(format!(
                "{} vs {} edges",
                forward.edge_count(),
                transpose.edge_count()
            )));
        }
        if let Some(v) = (0..forward.vertex_count() as VertexId).find(|&v| forward.degree(v) == 0) {
            return Err(EngineError::DeadEnd(v));
        }
        Ok(Self { forward, transpose })
    }

    pub fn forward(&self) -> &'g CsrGraph {
        self.forward
    }

    pub fn transpose(&self) -> &'g CsrGraph {
        self.transpose
    }

    pub fn vertex_count(&self) -> usize {
        self.forward.vertex_count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankResult {
    pub ranks: Vec<f64>,
    /// Sweeps performed.
    pub iterations: usize,
    /// Vertices recomputed, summed over all sweeps.
    pub affected_vertex_iterations: u64,
    pub converged: bool,
    /// L∞ change of the last sweep.
    pub final_delta: f64,
}

/// Per-sweep telemetry handed to an observer.
#[derive(Debug)]
pub struct SweepReport<'a> {
    /// Zero-based sweep index.
    pub iteration: usize,
    pub processed: usize,
    pub delta: f64,
    /// Ranks produced by this sweep.
    pub ranks: &'a [f64],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    Static,
    NaiveDynamic,
    DynamicTraversal,
    DynamicFrontier,
    DynamicFrontierPrune,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::Static,
        Approach::NaiveDynamic,
        Approach::DynamicTraversal,
        Approach::DynamicFrontier,
        Approach::DynamicFrontierPrune,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Static => "static",
            Approach::NaiveDynamic => "nd",
            Approach::DynamicTraversal => "dt",
            Approach::DynamicFrontier => "df",
            Approach::DynamicFrontierPrune => "dfp",
        }
    }

    pub fn is_dynamic(self) -> bool {
        self != Approach::Static
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown approach `{s}` (expected static, nd, dt, df or dfp)"))
    }
}

type Observer<'o> = dyn FnMut(&SweepReport<'_>) + 'o;

/// Runs the drivers over one snapshot. An engine is single-caller; build one
/// per thread to rank several snapshots concurrently.
pub struct Engine<'g, 'o> {
    snapshot: Snapshot<'g>,
    config: EngineConfig,
    observer: Option<&'o mut Observer<'o>>,
}

impl<'g, 'o> Engine<'g, 'o> {
    pub fn new(snapshot: Snapshot<'g>, config: &EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            snapshot,
            config: config.clone(),
            observer: None,
        })
    }

    /// Calls `observer` after every sweep.
    pub fn with_observer(mut self, observer: &'o mut Observer<'o>) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn static_pagerank(&mut self) -> Result<RankResult, EngineError> {
        let state = RankState::uniform(self.snapshot.vertex_count())?;
        Ok(self.iterate(state, None, UpdateMode::Plain, false))
    }

    pub fn naive_dynamic(&mut self, previous: &[f64]) -> Result<RankResult, EngineError> {
        let state = self.seeded(previous)?;
        Ok(self.iterate(state, None, UpdateMode::Plain, false))
    }

    pub fn dynamic_traversal(
        &mut self,
        batch: &BatchUpdate,
        previous: &[f64],
    ) -> Result<RankResult, EngineError> {
        let state = self.seeded(previous)?;
        let seeds = frontier::traversal_seeds(batch);
        let flags = frontier::mark_reachable(self.snapshot.forward, &seeds)?;
        Ok(self.iterate(state, Some(&flags), UpdateMode::Plain, false))
    }

    pub fn dynamic_frontier(
        &mut self,
        batch: &BatchUpdate,
        previous: &[f64],
        pruning: bool,
    ) -> Result<RankResult, EngineError> {
        let state = self.seeded(previous)?;
        let flags = frontier::initial_affected(self.snapshot.forward, batch)?;
        Ok(self.frontier_loop(state, flags, pruning))
    }

    /// The frontier loop starting from caller-supplied flags instead of a
    /// batch. Pending flags are expanded once before the first sweep.
    pub fn dynamic_frontier_from_flags(
        &mut self,
        flags: AffectedFlags,
        previous: &[f64],
        pruning: bool,
    ) -> Result<RankResult, EngineError> {
        let state = self.seeded(previous)?;
        if flags.len() != state.len() {
            return Err(RankError::LengthMismatch {
                expected: state.len(),
                found: flags.len(),
            }
            .into());
        }
        Ok(self.frontier_loop(state, flags, pruning))
    }

    /// Dispatches on `approach`. The batch is ignored by static and nd; the
    /// previous ranks are ignored by static.
    pub fn run(
        &mut self,
        approach: Approach,
        batch: &BatchUpdate,
        previous: &[f64],
    ) -> Result<RankResult, EngineError> {
        match approach {
            Approach::Static => self.static_pagerank(),
            Approach::NaiveDynamic => self.naive_dynamic(previous),
            Approach::DynamicTraversal => self.dynamic_traversal(batch, previous),
            Approach::DynamicFrontier => self.dynamic_frontier(batch, previous, false),
            Approach::DynamicFrontierPrune => self.dynamic_frontier(batch, previous, true),
        }
    }

    fn seeded(&self, previous: &[f64]) -> Result<RankState, EngineError> {
        let n = self.snapshot.vertex_count();
        if previous.len() != n {
            return Err(RankError::LengthMismatch {
                expected: n,
                found: previous.len(),
            }
            .into());
        }
        Ok(RankState::from_ranks(previous)?)
    }

    fn frontier_loop(&mut self, state: RankState, flags: AffectedFlags, pruning: bool) -> RankResult {
        let mode = if pruning {
            UpdateMode::ClosedLoopPrune
        } else {
            UpdateMode::Plain
        };
        self.iterate(state, Some(&flags), mode, true)
    }

    fn iterate(
        &mut self,
        mut state: RankState,
        flags: Option<&AffectedFlags>,
        mode: UpdateMode,
        expand: bool,
    ) -> RankResult {
        let cfg = &self.config;
        let forward = self.snapshot.forward;
        let transpose = self.snapshot.transpose;

        let by_in_degree: Option<DegreePartition> = match cfg.partition_strategy {
            PartitionStrategy::DontPartition => None,
            _ => Some(partition_by_degree(transpose, cfg.low_degree_threshold)),
        };
        let by_out_degree: Option<DegreePartition> = match cfg.partition_strategy {
            PartitionStrategy::PartitionBoth if expand => {
                Some(partition_by_degree(forward, cfg.low_degree_threshold))
            }
            _ => None,
        };
        let inline = Schedule::Inline {
            threshold: cfg.low_degree_threshold,
        };
        let rank_schedule = by_in_degree.as_ref().map_or(inline, Schedule::Partitioned);
        let mark_schedule = by_out_degree.as_ref().map_or(inline, Schedule::Partitioned);

        if let (Some(flags), true) = (flags, expand) {
            frontier::expand_affected(flags, forward, mark_schedule);
        }

        let mut iterations = 0;
        let mut work = 0u64;
        let mut delta = f64::INFINITY;
        let mut converged = false;
        while iterations < cfg.max_iterations {
            if let (Some(flags), true) = (flags, expand) {
                flags.clear_pending();
            }
            let processed = update_ranks(flags, &mut state, transpose, forward, rank_schedule, cfg, mode);
            delta = state.delta();
            state.swap();
            if let Some(observer) = self.observer.as_mut() {
                observer(&SweepReport {
                    iteration: iterations,
                    processed,
                    delta,
                    ranks: state.previous(),
                });
            }
            iterations += 1;
            work += processed as u64;
            if cfg.check_convergence && delta <= cfg.iteration_tolerance {
                converged = true;
                break;
            }
            if let (Some(flags), true) = (flags, expand) {
                frontier::expand_affected(flags, forward, mark_schedule);
            }
        }

        RankResult {
            ranks: state.into_previous(),
            iterations,
            affected_vertex_iterations: work,
            converged,
            final_delta: delta,
        }
    }
}

/// Static PageRank from a uniform start.
pub fn static_pagerank(snapshot: Snapshot<'_>, config: &EngineConfig) -> Result<RankResult, EngineError> {
    Engine::new(snapshot, config)?.static_pagerank()
}

/// Full recomputation seeded with the previous snapshot's ranks.
pub fn naive_dynamic(
    snapshot: Snapshot<'_>,
    previous: &[f64],
    config: &EngineConfig,
) -> Result<RankResult, EngineError> {
    Engine::new(snapshot, config)?.naive_dynamic(previous)
}

/// Recomputes only vertices reachable from the batch endpoints. The batch
/// must already be applied to `snapshot`.
pub fn dynamic_traversal(
    snapshot: Snapshot<'_>,
    batch: &BatchUpdate,
    previous: &[f64],
    config: &EngineConfig,
) -> Result<RankResult, EngineError> {
    Engine::new(snapshot, config)?.dynamic_traversal(batch, previous)
}

/// Frontier-based update, with pruning and the closed-loop formula when
/// `pruning` is set. The batch must already be applied to `snapshot`.
pub fn dynamic_frontier(
    snapshot: Snapshot<'_>,
    batch: &BatchUpdate,
    previous: &[f64],
    config: &EngineConfig,
    pruning: bool,
) -> Result<RankResult, EngineError> {
    Engine::new(snapshot, config)?.dynamic_frontier(batch, previous, pruning)
}
