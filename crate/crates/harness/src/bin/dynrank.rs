use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynrank_core::{Approach, EngineConfig, PartitionStrategy};
use dynrank_harness::{
    render, run_experiment, BatchSize, Chaining, ExperimentSpec, Mode, ReportFormat,
};

/// Runs static and dynamic PageRank experiments and reports timings and errors.
#[derive(Parser, Debug)]
#[command(name = "dynrank", version)]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Static PageRank on each graph.
    Static(Common),
    /// Base prefix of a temporal edge list followed by insertion batches.
    Temporal {
        #[command(flatten)]
        common: Common,
        /// Number of consecutive batches.
        #[arg(long, default_value_t = 100)]
        batches: usize,
        /// Share of the stream loaded as the base graph.
        #[arg(long, default_value_t = 0.9)]
        base_fraction: f64,
        /// Where dynamic approaches take their previous ranks from.
        #[arg(long, default_value = "per-approach")]
        chain: Chaining,
    },
    /// Random batches of insertions and deletions.
    Random {
        #[command(flatten)]
        common: Common,
        /// Share of each batch that is insertions.
        #[arg(long, default_value_t = 0.8)]
        insert_fraction: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Dont,
    Transpose,
    Both,
}

#[derive(Args, Debug)]
struct Common {
    /// Graph file (.mtx for MatrixMarket, anything else is a temporal edge list).
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    /// Comma-separated batch sizes as fractions of the edge count.
    #[arg(long, value_delimiter = ',', default_value = "1e-5,1e-4,1e-3")]
    batch_sizes: Vec<BatchSize>,
    /// Comma-separated approaches: static, nd, dt, df, dfp.
    #[arg(long, value_delimiter = ',', default_value = "static,nd,dt,df,dfp")]
    approaches: Vec<Approach>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "both")]
    partition_strategy: Strategy,
    /// Degree at or below which a vertex is handled by a single task.
    #[arg(long, default_value_t = 32)]
    dp_threshold: usize,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    frontier_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    prune_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Report runtimes as 0 so repeated runs produce identical files.
    #[arg(long)]
    deterministic: bool,
    /// Reject graph files larger than this many MiB.
    #[arg(long, default_value_t = 8192)]
    max_file_mb: u64,
}

impl Common {
    fn spec(&self, mode: Mode) -> ExperimentSpec {
        ExperimentSpec {
            graphs: self.graphs.clone(),
            mode,
            batch_sizes: self.batch_sizes.clone(),
            approaches: self.approaches.clone(),
            seed: self.seed,
            repetitions: self.reps,
            config: EngineConfig {
                damping: self.alpha,
                iteration_tolerance: self.tol,
                frontier_tolerance: self.frontier_tol,
                prune_tolerance: self.prune_tol,
                max_iterations: self.max_iters,
                low_degree_threshold: self.dp_threshold,
                partition_strategy: match self.partition_strategy {
                    Strategy::Dont => PartitionStrategy::DontPartition,
                    Strategy::Transpose => PartitionStrategy::PartitionTranspose,
                    Strategy::Both => PartitionStrategy::PartitionBoth,
                },
                check_convergence: true,
            },
            record_timing: !self.deterministic,
            max_file_bytes: self.max_file_mb.saturating_mul(1 << 20),
            ..ExperimentSpec::default()
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, spec) = match &cli.mode {
        Command::Static(common) => (common, common.spec(Mode::Static)),
        Command::Temporal {
            common,
            batches,
            base_fraction,
            chain,
        } => (
            common,
            ExperimentSpec {
                batch_count: *batches,
                base_fraction: *base_fraction,
                chaining: *chain,
                ..common.spec(Mode::Temporal)
            },
        ),
        Command::Random {
            common,
            insert_fraction,
        } => (
            common,
            ExperimentSpec {
                insert_fraction: *insert_fraction,
                ..common.spec(Mode::Random)
            },
        ),
    };

    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot start thread pool")?;
    }

    let rows = run_experiment(&spec)?;
    let bytes = render(&rows, common.format)?;
    match &common.out {
        Some(path) => std::fs::write(path, bytes)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
