//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use dynrank_core::frontier::{self, Schedule};
use dynrank_core::partition::partition_by_degree;
use dynrank_core::rank::update_ranks;
use dynrank_core::workload::{generate_random_batch, write_matrix_market, EdgeList};
use dynrank_core::*;
use dynrank_harness::report::{COLUMNS, SUMMARY_GRAPH};
use dynrank_harness::{render, run_experiment, BatchSize, ExperimentRow, ExperimentSpec, Mode, ReportFormat};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x5eed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// One small test graph: uniform or skewed, `1 ≤ |V| ≤ 100`.
fn small_graph(i: usize) -> (Vec<Edge>, usize) {
    let mut rng = StdRng::seed_from_u64(SEED ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.gen_range(1..=100usize);
    let m = n * rng.gen_range(1..=6usize);
    let seed = rng.gen();
    let edges = if i.is_multiple_of(2) {
        uniform_edges(n, m, seed)
    } else {
        let scale = (n as f64).log2().ceil().max(1.0) as u32;
        rmat_edges(scale, m, seed)
            .into_iter()
            .map(|(u, v)| (u % n as u32, v % n as u32))
            .collect()
    };
    (edges, n)
}

fn small_suite() -> Vec<(CsrGraph, CsrGraph)> {
    (0..200)
        .map(|i| {
            let (edges, n) = small_graph(i);
            looped(&edges, n)
        })
        .collect()
}

/// A batch of up to three updates, or an empty one when the graph has no room.
fn small_batch(g: &CsrGraph, seed: u64) -> BatchUpdate {
    let n = g.vertex_count();
    let nonloop = g.edge_count() - n;
    let free = n * n - g.edge_count();
    let size = 3.min(nonloop + free);
    if size == 0 {
        return BatchUpdate::default();
    }
    generate_random_batch(g, size, 0.8, seed).unwrap_or_default()
}

fn snapshot<'g>(g: &'g CsrGraph, t: &'g CsrGraph) -> Snapshot<'g> {
    Snapshot::new(g, t).expect("valid snapshot")
}

fn rank_bytes(ranks: &[f64]) -> Vec<u8> {
    ranks.iter().flat_map(|r| r.to_bits().to_le_bytes()).collect()
}

fn criterion_1() -> (Outcome, Vec<u8>) {
    let start = Instant::now();
    let config = EngineConfig::default();
    let mut worst = 0.0f64;
    let mut bytes = Vec::new();
    for (g, t) in small_suite() {
        let ours = engine::static_pagerank(snapshot(&g, &t), &config).unwrap();
        let oracle = dense_pagerank(&g, 0.85, 1e-14, 100_000);
        worst = worst.max(linf(&ours.ranks, &oracle));
        bytes.extend(rank_bytes(&ours.ranks));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && elapsed < Duration::from_secs(30);
    (
        outcome(
            pass,
            format!("200 graphs, worst L∞ {worst:.3e} (≤ 1e-8), {:.2}s (< 30s)", elapsed.as_secs_f64()),
        ),
        bytes,
    )
}

fn criterion_2() -> Outcome {
    let config = EngineConfig::default();
    let mut worst = [0.0f64; 5];
    for (i, (g, t)) in small_suite().into_iter().enumerate() {
        let before = engine::static_pagerank(snapshot(&g, &t), &config).unwrap().ranks;
        let batch = small_batch(&g, SEED + i as u64);
        let (g2, _) = g.apply_batch(&batch).unwrap();
        let t2 = g2.transpose();
        for (k, approach) in Approach::ALL.into_iter().enumerate() {
            let mut w = 0.0f64;
            let mut observe = |r: &SweepReport<'_>| {
                w = w.max((r.ranks.iter().sum::<f64>() - 1.0).abs());
            };
            Engine::new(snapshot(&g2, &t2), &config)
                .unwrap()
                .with_observer(&mut observe)
                .run(approach, &batch, &before)
                .unwrap();
            worst[k] = worst[k].max(w);
        }
    }
    let per_engine: Vec<String> = Approach::ALL
        .iter()
        .zip(&worst)
        .map(|(a, w)| format!("{a} {w:.1e}"))
        .collect();
    outcome(
        worst.iter().all(|&w| w <= 1e-9),
        format!("worst |Σ−1| per sweep (≤ 1e-9): {}", per_engine.join(", ")),
    )
}

fn criterion_3() -> Outcome {
    let config = EngineConfig::default();
    let mut worst = 0.0f64;
    for (g, t) in small_suite().into_iter().take(50) {
        let n = g.vertex_count();
        let fixed = dense_pagerank(&g, 0.85, 1e-15, 100_000);
        let mut state = RankState::from_ranks(&fixed).unwrap();
        update_ranks(
            Some(&AffectedFlags::all_affected(n)),
            &mut state,
            &t,
            &g,
            Schedule::Inline {
                threshold: config.low_degree_threshold,
            },
            &config,
            UpdateMode::ClosedLoopPrune,
        );
        worst = worst.max(linf(state.current(), &fixed));
    }
    outcome(
        worst <= 1e-10,
        format!("50 graphs, closed-loop update at the fixed point moves L∞ {worst:.3e} (≤ 1e-10)"),
    )
}

fn criterion_4() -> Outcome {
    let config = EngineConfig::default();
    let prune_off = EngineConfig {
        frontier_tolerance: 0.0,
        ..config.clone()
    };
    let mut bitwise = true;
    let mut worst = 0.0f64;
    let mut same_count = true;
    for (g, t) in small_suite() {
        let n = g.vertex_count();
        let uniform = vec![1.0 / n as f64; n];
        let s = engine::static_pagerank(snapshot(&g, &t), &config).unwrap();
        let nd = engine::naive_dynamic(snapshot(&g, &t), &uniform, &config).unwrap();
        bitwise &= rank_bytes(&s.ranks) == rank_bytes(&nd.ranks) && s.iterations == nd.iterations;

        let mut nd_sweeps = Vec::new();
        let mut record = |r: &SweepReport<'_>| nd_sweeps.push(r.ranks.to_vec());
        Engine::new(snapshot(&g, &t), &prune_off)
            .unwrap()
            .with_observer(&mut record)
            .naive_dynamic(&uniform)
            .unwrap();
        let mut df_sweeps = Vec::new();
        let mut record = |r: &SweepReport<'_>| df_sweeps.push(r.ranks.to_vec());
        Engine::new(snapshot(&g, &t), &prune_off)
            .unwrap()
            .with_observer(&mut record)
            .dynamic_frontier_from_flags(AffectedFlags::all_affected(n), &uniform, false)
            .unwrap();
        same_count &= nd_sweeps.len() == df_sweeps.len();
        for (a, b) in nd_sweeps.iter().zip(&df_sweeps) {
            worst = worst.max(linf(a, b));
        }
    }
    outcome(
        bitwise && same_count && worst <= 1e-12,
        format!(
            "nd from uniform bitwise equals static: {bitwise}; df all-marked vs nd per sweep L∞ {worst:.1e} (≤ 1e-12), equal sweep counts: {same_count}"
        ),
    )
}

fn bfs_oracle(g: &CsrGraph, seeds: &[VertexId]) -> BTreeSet<VertexId> {
    let mut seen: BTreeSet<VertexId> = seeds.iter().copied().collect();
    let mut queue: VecDeque<VertexId> = seen.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

fn flagged(bytes: &[u8]) -> BTreeSet<VertexId> {
    bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .map(|(i, _)| i as VertexId)
        .collect()
}

fn criterion_5() -> Outcome {
    let mut mismatches = 0usize;
    for i in 0..500u64 {
        let mut rng = StdRng::seed_from_u64(SEED ^ (i << 20));
        let n = rng.gen_range(2..=120usize);
        let edges = if i.is_multiple_of(2) {
            uniform_edges(n, n * rng.gen_range(1..8), rng.gen())
        } else {
            rmat_edges(7, n * rng.gen_range(1..8), rng.gen())
                .into_iter()
                .map(|(u, v)| (u % n as u32, v % n as u32))
                .collect()
        };
        let (g, _) = looped(&edges, n);
        let batch = small_batch(&g, rng.gen());
        let (g2, _) = g.apply_batch(&batch).unwrap();

        // initialAffected
        let flags = frontier::initial_affected(&g2, &batch).unwrap();
        let pending: BTreeSet<VertexId> = batch
            .deletions
            .iter()
            .chain(&batch.insertions)
            .map(|&(u, _)| u)
            .collect();
        let affected: BTreeSet<VertexId> = batch.deletions.iter().map(|&(_, v)| v).collect();
        mismatches += usize::from(flagged(&flags.pending_bytes()) != pending);
        mismatches += usize::from(flagged(&flags.affected_bytes()) != affected);

        // expandAffected from random pending flags, both schedules.
        let threshold = rng.gen_range(1..40usize);
        let pending: BTreeSet<VertexId> = (0..n as VertexId).filter(|_| rng.gen_bool(0.2)).collect();
        let preset: BTreeSet<VertexId> = (0..n as VertexId).filter(|_| rng.gen_bool(0.1)).collect();
        let mut expected = preset.clone();
        for &u in &pending {
            expected.extend(g2.neighbors(u).iter().copied());
        }
        let partition = partition_by_degree(&g2, threshold);
        for schedule in [Schedule::Partitioned(&partition), Schedule::Inline { threshold }] {
            let flags = AffectedFlags::new(n);
            pending.iter().for_each(|&u| flags.mark_pending(u));
            preset.iter().for_each(|&v| flags.mark_affected(v));
            frontier::expand_affected(&flags, &g2, schedule);
            mismatches += usize::from(flagged(&flags.affected_bytes()) != expected);
        }

        // markReachable
        let seeds = frontier::traversal_seeds(&batch);
        let flags = frontier::mark_reachable(&g2, &seeds).unwrap();
        mismatches += usize::from(flagged(&flags.affected_bytes()) != bfs_oracle(&g2, &seeds));
    }
    outcome(
        mismatches == 0,
        format!("500 instances, {mismatches} affected-set mismatches (exact match required)"),
    )
}

/// R-MAT graphs with 1e4 to 1e5 edges, written as MatrixMarket files.
fn rmat_suite(dir: &Path) -> Vec<PathBuf> {
    [(11u32, 12_000usize), (12, 26_000), (13, 55_000), (14, 110_000)]
        .into_iter()
        .enumerate()
        .map(|(i, (scale, m))| {
            let path = dir.join(format!("rmat-{scale}.mtx"));
            let list = EdgeList {
                edges: rmat_edges(scale, m, SEED + i as u64),
                vertex_count: 1 << scale,
            };
            let file = std::fs::File::create(&path).unwrap();
            write_matrix_market(&list, std::io::BufWriter::new(file)).unwrap();
            path
        })
        .collect()
}

fn random_spec(graphs: Vec<PathBuf>) -> ExperimentSpec {
    ExperimentSpec {
        graphs,
        mode: Mode::Random,
        batch_sizes: vec!["1e-4".parse::<BatchSize>().unwrap(), "1e-3".parse().unwrap()],
        approaches: vec![
            Approach::NaiveDynamic,
            Approach::DynamicTraversal,
            Approach::DynamicFrontier,
            Approach::DynamicFrontierPrune,
        ],
        seed: SEED,
        repetitions: 3,
        record_timing: false,
        ..ExperimentSpec::default()
    }
}

fn criterion_6(rows: &[ExperimentRow], elapsed: Duration) -> Outcome {
    let batch_rows: Vec<&ExperimentRow> = rows.iter().filter(|r| !r.is_summary()).collect();
    let mut details = Vec::new();
    let mut pass = elapsed < Duration::from_secs(120) && !batch_rows.is_empty();
    for approach in ["nd", "dt", "df", "dfp"] {
        let worst = batch_rows
            .iter()
            .filter(|r| r.approach == approach)
            .map(|r| r.l1_error)
            .fold(0.0f64, f64::max);
        pass &= worst <= 1e-5;
        details.push(format!("{approach} {worst:.1e}"));
    }
    pass &= batch_rows.iter().all(|r| r.converged);
    outcome(
        pass,
        format!(
            "{} runs on 4 R-MAT graphs, worst L1 (≤ 1e-5): {}, {:.1}s (< 120s)",
            batch_rows.len(),
            details.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    }
}

fn criterion_7(rows: &[ExperimentRow]) -> Outcome {
    let work = |approach: &str| {
        median(
            rows.iter()
                .filter(|r| !r.is_summary() && r.batch_size == "1e-4" && r.approach == approach)
                .map(|r| r.affected_vertex_iterations as f64)
                .collect(),
        )
    };
    let (nd, df, dfp) = (work("nd"), work("df"), work("dfp"));
    outcome(
        dfp < df && df < nd && dfp <= 0.5 * nd,
        format!(
            "median vertex-iterations at 1e-4|E|: dfp {dfp} < df {df} < nd {nd}, dfp/nd {:.3} (≤ 0.5)",
            dfp / nd
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut mismatches = 0usize;
    for i in 0..1000u64 {
        let mut rng = StdRng::seed_from_u64(SEED ^ (i << 24) ^ 0x8);
        let n = rng.gen_range(1..=200usize);
        let scale = (n as f64).log2().ceil().max(1.0) as u32;
        let edges: Vec<Edge> = rmat_edges(scale, n * rng.gen_range(1..40), rng.gen())
            .into_iter()
            .map(|(u, v)| (u % n as u32, v % n as u32))
            .collect();
        let (_, t) = looped(&edges, n);
        let threshold = if i % 4 == 0 { 32 } else { rng.gen_range(0..60) };
        let p = partition_by_degree(&t, threshold);
        let (low, high): (Vec<VertexId>, Vec<VertexId>) =
            (0..n as VertexId).partition(|&v| t.degree(v) <= threshold);
        let expected: Vec<VertexId> = low.iter().chain(&high).copied().collect();
        mismatches += usize::from(p.order() != expected.as_slice() || p.low_count() != low.len());
    }
    outcome(
        mismatches == 0,
        format!("1000 graphs, {mismatches} partitions differ from the stable sequential split"),
    )
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sx-synthetic-10k.txt")
}

fn run_cli(out: &Path, deterministic: bool) -> (bool, Duration, String) {
    let start = Instant::now();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dynrank"));
    cmd.arg("temporal")
        .arg("--graph")
        .arg(fixture())
        .args(["--batch-sizes", "1e-3", "--approaches", "static,nd,dt,df,dfp", "--out"])
        .arg(out);
    if deterministic {
        cmd.arg("--deterministic");
    }
    let output = cmd.output().expect("run dynrank");
    (
        output.status.success(),
        start.elapsed(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn criterion_9(dir: &Path) -> Outcome {
    let out = dir.join("temporal.csv");
    let (ok, elapsed, stderr) = run_cli(&out, false);
    if !ok {
        return outcome(false, format!("dynrank failed: {stderr}"));
    }
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header_ok = reader.headers().unwrap().iter().eq(COLUMNS.iter().copied());
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let well_formed = records.iter().all(|r| {
        r.len() == COLUMNS.len()
            && r[4].parse::<f64>().is_ok()
            && r[5].parse::<u64>().is_ok()
            && r[6].parse::<u64>().is_ok()
            && r[7].parse::<f64>().is_ok()
            && (r[3].is_empty() == (&r[0] == SUMMARY_GRAPH))
    });
    let summary: Vec<&csv::StringRecord> = records.iter().filter(|r| &r[0] == SUMMARY_GRAPH).collect();
    let approaches: BTreeSet<&str> = summary.iter().map(|r| &r[1]).collect();
    let all_converged = records.iter().all(|r| &r[8] == "true");
    let batch_rows = records.len() - summary.len();
    outcome(
        header_ok
            && well_formed
            && summary.len() == 5
            && approaches.len() == 5
            && batch_rows == 500
            && all_converged
            && elapsed < Duration::from_secs(60),
        format!(
            "{} summary rows over {} approaches, {batch_rows} batch rows, schema ok: {}, all converged: {all_converged}, {:.1}s (< 60s)",
            summary.len(),
            approaches.len(),
            header_ok && well_formed,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10(dir: &Path, ranks_first: &[u8], random_first: &[u8], graphs: Vec<PathBuf>) -> Outcome {
    let (_, ranks_again) = criterion_1();
    let ranks_same = ranks_first == ranks_again.as_slice();

    let spec = random_spec(graphs);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let again = pool.install(|| run_experiment(&spec)).unwrap();
    let random_same = random_first == render(&again, ReportFormat::Csv).unwrap().as_slice();

    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    let cli_same = run_cli(&a, true).0
        && run_cli(&b, true).0
        && std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    outcome(
        ranks_same && random_same && cli_same,
        format!(
            "byte-identical reruns: static suite {ranks_same}, random suite on 3 threads {random_same}, temporal CLI {cli_same}"
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let (c1, ranks) = criterion_1();
    results.push((1, "static ranks match a dense oracle", c1));
    results.push((2, "rank mass is conserved every sweep", criterion_2()));
    results.push((3, "closed-loop update preserves the fixed point", criterion_3()));
    results.push((4, "naive dynamic and frontier equivalences", criterion_4()));
    results.push((5, "affected-set marking matches set oracles", criterion_5()));

    let graphs = rmat_suite(dir.path());
    let start = Instant::now();
    let rows = run_experiment(&random_spec(graphs.clone())).unwrap();
    let elapsed = start.elapsed();
    let random_report = render(&rows, ReportFormat::Csv).unwrap();
    results.push((6, "dynamic approaches stay within L1 of the reference", criterion_6(&rows, elapsed)));
    results.push((7, "frontier pruning reduces work", criterion_7(&rows)));
    results.push((8, "degree partition matches a sequential oracle", criterion_8()));
    results.push((9, "temporal run on the fixture produces a valid report", criterion_9(dir.path())));
    results.push((
        10,
        "runs are reproducible",
        criterion_10(dir.path(), &ranks, &random_report, graphs),
    ));

    let mut failed = 0;
    for (id, name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}  {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
