//! Parallel static and dynamic PageRank over CSR graphs.
//!
//! The crate provides five drivers that share a single pull-based,
//! synchronous rank-update kernel:
//!
//! - [`engine::static_pagerank`]: power iteration from a uniform vector.
//! - [`engine::naive_dynamic`]: the same loop, seeded with the ranks of the
//!   previous snapshot.
//! - [`engine::dynamic_traversal`]: restricts work to vertices reachable from
//!   the endpoints of a batch update.
//! - [`engine::dynamic_frontier`]: grows the set of affected vertices
//!   incrementally from the update sites, optionally pruning vertices whose
//!   ranks have settled and switching to a closed-loop rank formula.
//!
//! Graphs are immutable [`CsrGraph`] snapshots. Every snapshot is augmented
//! with a self-loop on each vertex, so there are no dead ends and no global
//! teleport term is needed.
//!
//! ```
//! use dynrank_core::{Approach, BatchUpdate, CsrGraph, Engine, EngineConfig, Snapshot};
//!
//! let graph = CsrGraph::from_edges(&[(0, 1), (1, 2), (2, 0)], 3)?.with_self_loops();
//! let transpose = graph.transpose();
//! let config = EngineConfig::default();
//! let before = Engine::new(Snapshot::new(&graph, &transpose)?, &config)?.static_pagerank()?;
//!
//! let batch = BatchUpdate::new(vec![(2, 0)], vec![(2, 1)]);
//! let (updated, _) = graph.apply_batch(&batch)?;
//! let updated_t = updated.transpose();
//! let after = Engine::new(Snapshot::new(&updated, &updated_t)?, &config)?
//!     .run(Approach::DynamicFrontierPrune, &batch, &before.ranks)?;
//! assert!(after.converged);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod engine;
pub mod frontier;
pub mod graph;
pub mod partition;
pub mod rank;
pub mod workload;

mod sync_slice;

pub use engine::{Approach, Engine, EngineError, RankResult, Snapshot, SweepReport};
pub use frontier::AffectedFlags;
pub use graph::{BatchDiagnostics, BatchUpdate, CsrGraph, Edge, GraphError, VertexId};
pub use partition::DegreePartition;
pub use rank::{EngineConfig, PartitionStrategy, RankError, RankState, UpdateMode};
