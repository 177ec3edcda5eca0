//! Experiment driver: loads graphs, builds batches, runs the engines and
//! collects one row per (graph, approach, batch) plus summary rows.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use dynrank_core::workload::{
    self, batch_size_for, generate_random_batch, split_temporal, TemporalEdgeList, WorkloadError,
};
use dynrank_core::{
    rank, Approach, BatchUpdate, CsrGraph, Edge, Engine, EngineConfig, EngineError, GraphError,
    RankError, Snapshot,
};
use thiserror::Error;

use crate::report::{ExperimentRow, SUMMARY_GRAPH};

/// Sweeps used for reference ranks.
pub const REFERENCE_ITERATIONS: usize = 500;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot load {path}")]
    Workload {
        path: PathBuf,
        #[source]
        source: WorkloadError,
    },
    #[error("{path} is {size} bytes, above the {limit}-byte budget")]
    TooLarge { path: PathBuf, size: u64, limit: u64 },
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("invalid experiment: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Static PageRank on each graph, repeated.
    #[default]
    Static,
    /// Base prefix of a temporal stream followed by consecutive insertion batches.
    Temporal,
    /// Independent random batches of insertions and deletions on each graph.
    Random,
}

/// Which previous ranks a dynamic approach starts from on batch `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Chaining {
    /// Each approach continues from its own output on batch `k - 1`.
    #[default]
    PerApproach,
    /// Every approach starts from the reference ranks of batch `k - 1`.
    Shared,
}

impl FromStr for Chaining {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-approach" => Ok(Self::PerApproach),
            "shared" => Ok(Self::Shared),
            _ => Err(format!("unknown chaining `{s}` (expected per-approach or shared)")),
        }
    }
}

/// A batch size as a fraction of the edge count, keeping the user's spelling.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchSize {
    pub label: String,
    pub fraction: f64,
}

impl FromStr for BatchSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = s.trim();
        let fraction: f64 = label
            .parse()
            .map_err(|_| format!("batch size `{label}` is not a number"))?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(format!("batch size `{label}` must lie in (0, 1]"));
        }
        Ok(Self {
            label: label.to_string(),
            fraction,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub graphs: Vec<PathBuf>,
    pub mode: Mode,
    pub batch_sizes: Vec<BatchSize>,
    pub approaches: Vec<Approach>,
    pub seed: u64,
    /// Repetitions per graph (static mode) or per batch size (random mode).
    pub repetitions: usize,
    /// Temporal mode: number of consecutive batches.
    pub batch_count: usize,
    /// Temporal mode: share of the stream loaded as the base graph.
    pub base_fraction: f64,
    /// Random mode: share of each batch that is insertions.
    pub insert_fraction: f64,
    pub chaining: Chaining,
    pub config: EngineConfig,
    /// When false, runtimes are reported as 0 so reports are byte-reproducible.
    pub record_timing: bool,
    /// Graph files above this size are rejected before loading.
    pub max_file_bytes: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            graphs: Vec::new(),
            mode: Mode::Static,
            batch_sizes: Vec::new(),
            approaches: Approach::ALL.to_vec(),
            seed: 42,
            repetitions: 1,
            batch_count: 100,
            base_fraction: 0.9,
            insert_fraction: 0.8,
            chaining: Chaining::PerApproach,
            config: EngineConfig::default(),
            record_timing: true,
            max_file_bytes: 8 << 30,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        self.config.validate()?;
        if self.graphs.is_empty() {
            return bad("no graphs given");
        }
        if self.approaches.is_empty() {
            return bad("no approaches given");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if self.mode != Mode::Static && self.batch_sizes.is_empty() {
            return bad("no batch sizes given");
        }
        if self.mode == Mode::Temporal && self.batch_count == 0 {
            return bad("batch count must be positive");
        }
        if !(0.0..=1.0).contains(&self.insert_fraction) {
            return bad("insert fraction must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Ranks from exactly [`REFERENCE_ITERATIONS`] static sweeps with the
/// convergence check disabled.
pub fn compute_reference_ranks(snapshot: Snapshot<'_>, config: &EngineConfig) -> Result<Vec<f64>, EngineError> {
    let config = EngineConfig {
        max_iterations: REFERENCE_ITERATIONS,
        check_convergence: false,
        ..config.clone()
    };
    Ok(Engine::new(snapshot, &config)?.static_pagerank()?.ranks)
}

/// Geometric mean of positive values; zeros and NaN propagate.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    if values.contains(&0.0) {
        return 0.0;
    }
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    (log_sum / values.len() as f64).exp()
}

fn arithmetic_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn is_matrix_market(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
}

fn check_size(path: &Path, limit: u64) -> Result<(), HarnessError> {
    let size = fs::metadata(path)
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?
        .len();
    if size > limit {
        return Err(HarnessError::TooLarge {
            path: path.to_path_buf(),
            size,
            limit,
        });
    }
    Ok(())
}

fn workload_err(path: &Path) -> impl FnOnce(WorkloadError) -> HarnessError + '_ {
    move |source| HarnessError::Workload {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads a static graph: MatrixMarket for `.mtx`, otherwise a temporal edge
/// list with timestamps ignored.
fn load_static(path: &Path) -> Result<(Vec<Edge>, usize), HarnessError> {
    if is_matrix_market(path) {
        let list = workload::load_matrix_market(path).map_err(workload_err(path))?;
        Ok((list.edges, list.vertex_count))
    } else {
        let list = load_temporal(path)?;
        let edges = list.entries.iter().map(|e| (e.source, e.target)).collect();
        Ok((edges, list.vertex_count))
    }
}

fn load_temporal(path: &Path) -> Result<TemporalEdgeList, HarnessError> {
    workload::load_temporal_edge_list(path).map_err(workload_err(path))
}

struct Timer {
    enabled: bool,
}

impl Timer {
    fn time<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        let millis = if self.enabled {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        (out, millis)
    }
}

fn row(
    graph: &str,
    approach: Approach,
    batch_size: &str,
    batch_index: usize,
    millis: f64,
    result: &dynrank_core::RankResult,
    reference: &[f64],
) -> Result<ExperimentRow, HarnessError> {
    Ok(ExperimentRow {
        graph: graph.to_string(),
        approach: approach.name().to_string(),
        batch_size: batch_size.to_string(),
        batch_index: Some(batch_index),
        runtime_millis: millis,
        iterations: result.iterations as u64,
        affected_vertex_iterations: result.affected_vertex_iterations,
        l1_error: rank::l1_norm_delta(&result.ranks, reference)?,
        converged: result.converged,
    })
}

/// Runs the experiment and returns per-batch rows followed by summary rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>, HarnessError> {
    spec.validate()?;
    let timer = Timer {
        enabled: spec.record_timing,
    };
    let mut rows = Vec::new();
    for path in &spec.graphs {
        check_size(path, spec.max_file_bytes)?;
        let name = graph_name(path);
        match spec.mode {
            Mode::Static => run_static(spec, &timer, path, &name, &mut rows)?,
            Mode::Temporal => run_temporal(spec, &timer, path, &name, &mut rows)?,
            Mode::Random => run_random(spec, &timer, path, &name, &mut rows)?,
        }
    }
    let summary = summarize(&rows);
    rows.extend(summary);
    Ok(rows)
}

fn run_static(
    spec: &ExperimentSpec,
    timer: &Timer,
    path: &Path,
    name: &str,
    rows: &mut Vec<ExperimentRow>,
) -> Result<(), HarnessError> {
    let (edges, n) = load_static(path)?;
    let graph = CsrGraph::from_edges(&edges, n)?.with_self_loops();
    let transpose = graph.transpose();
    let snapshot = Snapshot::new(&graph, &transpose)?;
    let reference = compute_reference_ranks(snapshot, &spec.config)?;
    for rep in 0..spec.repetitions {
        let (result, millis) = timer.time(|| Engine::new(snapshot, &spec.config)?.static_pagerank());
        rows.push(row(name, Approach::Static, "0", rep, millis, &result?, &reference)?);
    }
    Ok(())
}

fn run_temporal(
    spec: &ExperimentSpec,
    timer: &Timer,
    path: &Path,
    name: &str,
    rows: &mut Vec<ExperimentRow>,
) -> Result<(), HarnessError> {
    let list = load_temporal(path)?;
    for size in &spec.batch_sizes {
        let split = split_temporal(
            &list,
            spec.base_fraction,
            spec.batch_count,
            batch_size_for(size.fraction, list.len()),
        )
        .map_err(workload_err(path))?;
        let mut graph = CsrGraph::from_edges(&split.base, list.vertex_count)?.with_self_loops();
        let transpose = graph.transpose();
        let initial = Engine::new(Snapshot::new(&graph, &transpose)?, &spec.config)?
            .static_pagerank()?
            .ranks;
        let mut chains: HashMap<Approach, Vec<f64>> =
            spec.approaches.iter().map(|&a| (a, initial.clone())).collect();
        let mut shared = initial;

        for (k, batch) in split.batches.iter().enumerate() {
            graph = graph.apply_batch(batch)?.0;
            let transpose = graph.transpose();
            let snapshot = Snapshot::new(&graph, &transpose)?;
            let reference = compute_reference_ranks(snapshot, &spec.config)?;
            for &approach in &spec.approaches {
                let previous = match spec.chaining {
                    Chaining::PerApproach => &chains[&approach],
                    Chaining::Shared => &shared,
                };
                let (result, millis) =
                    timer.time(|| Engine::new(snapshot, &spec.config)?.run(approach, batch, previous));
                let result = result?;
                rows.push(row(name, approach, &size.label, k, millis, &result, &reference)?);
                chains.insert(approach, result.ranks);
            }
            shared = reference;
        }
    }
    Ok(())
}

fn run_random(
    spec: &ExperimentSpec,
    timer: &Timer,
    path: &Path,
    name: &str,
    rows: &mut Vec<ExperimentRow>,
) -> Result<(), HarnessError> {
    let (edges, n) = load_static(path)?;
    let base = CsrGraph::from_edges(&edges, n)?.with_self_loops();
    let base_transpose = base.transpose();
    let previous = Engine::new(Snapshot::new(&base, &base_transpose)?, &spec.config)?
        .static_pagerank()?
        .ranks;
    for (s, size) in spec.batch_sizes.iter().enumerate() {
        let total = batch_size_for(size.fraction, base.edge_count());
        for rep in 0..spec.repetitions {
            let seed = spec
                .seed
                .wrapping_add((s as u64) << 32)
                .wrapping_add(rep as u64);
            let batch: BatchUpdate = generate_random_batch(&base, total, spec.insert_fraction, seed)
                .map_err(workload_err(path))?;
            let graph = base.apply_batch(&batch)?.0;
            let transpose = graph.transpose();
            let snapshot = Snapshot::new(&graph, &transpose)?;
            let reference = compute_reference_ranks(snapshot, &spec.config)?;
            for &approach in &spec.approaches {
                let (result, millis) =
                    timer.time(|| Engine::new(snapshot, &spec.config)?.run(approach, &batch, &previous));
                rows.push(row(name, approach, &size.label, rep, millis, &result?, &reference)?);
            }
        }
    }
    Ok(())
}

/// One row per (approach, batch size): the geometric mean across graphs of
/// each graph's arithmetic mean. Counts are rounded to the nearest integer.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<ExperimentRow> {
    // Keys in order of first appearance.
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<Vec<&ExperimentRow>>> = HashMap::new();
    let mut graph_slot: HashMap<(String, String, String), usize> = HashMap::new();
    for r in rows.iter().filter(|r| !r.is_summary()) {
        let key = (r.approach.clone(), r.batch_size.clone());
        let per_graph = groups.entry(key.clone()).or_insert_with(|| {
            keys.push(key.clone());
            Vec::new()
        });
        let slot = *graph_slot
            .entry((key.0.clone(), key.1.clone(), r.graph.clone()))
            .or_insert_with(|| {
                per_graph.push(Vec::new());
                per_graph.len() - 1
            });
        per_graph[slot].push(r);
    }

    keys.into_iter()
        .map(|key| {
            let per_graph = &groups[&key];
            let stat = |f: &dyn Fn(&ExperimentRow) -> f64| {
                let means: Vec<f64> = per_graph
                    .iter()
                    .map(|g| arithmetic_mean(&g.iter().map(|r| f(r)).collect::<Vec<_>>()))
                    .collect();
                geometric_mean(&means)
            };
            ExperimentRow {
                graph: SUMMARY_GRAPH.to_string(),
                approach: key.0.clone(),
                batch_size: key.1.clone(),
                batch_index: None,
                runtime_millis: stat(&|r| r.runtime_millis),
                iterations: stat(&|r| r.iterations as f64).round() as u64,
                affected_vertex_iterations: stat(&|r| r.affected_vertex_iterations as f64).round() as u64,
                l1_error: stat(&|r| r.l1_error),
                converged: per_graph.iter().flatten().all(|r| r.converged),
            }
        })
        .collect()
}
