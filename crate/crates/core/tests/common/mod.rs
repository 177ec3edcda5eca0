//! Test-only graph generators and oracles shared by the integration suites.
#![allow(dead_code)]

use dynrank_core::graph::{CsrGraph, Edge, VertexId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// `m` uniformly drawn directed pairs over `n` vertices (duplicates and
/// self-pairs collapse in CSR construction).
pub fn uniform_edges(n: usize, m: usize, seed: u64) -> Vec<Edge> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..m)
        .map(|_| (rng.gen_range(0..n) as VertexId, rng.gen_range(0..n) as VertexId))
        .collect()
}

/// R-MAT edges over `2^scale` vertices with the usual (0.57, 0.19, 0.19)
/// quadrant probabilities, giving a skewed, web-like degree distribution.
pub fn rmat_edges(scale: u32, m: usize, seed: u64) -> Vec<Edge> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (a, b, c) = (0.57, 0.19, 0.19);
    (0..m)
        .map(|_| {
            let (mut u, mut v) = (0u32, 0u32);
            for bit in (0..scale).rev() {
                let p: f64 = rng.gen();
                let (du, dv) = if p < a {
                    (0, 0)
                } else if p < a + b {
                    (0, 1)
                } else if p < a + b + c {
                    (1, 0)
                } else {
                    (1, 1)
                };
                u |= du << bit;
                v |= dv << bit;
            }
            (u, v)
        })
        .collect()
}

pub fn looped(edges: &[Edge], n: usize) -> (CsrGraph, CsrGraph) {
    let g = CsrGraph::from_edges(edges, n).unwrap().with_self_loops();
    let t = g.transpose();
    (g, t)
}

/// Dense power iteration built straight from the edge set, independent of
/// the CSR kernel. Runs until successive iterates agree within `tolerance`
/// (L∞) or `max_iterations` sweeps have been done.
pub fn dense_pagerank(g: &CsrGraph, damping: f64, tolerance: f64, max_iterations: usize) -> Vec<f64> {
    let n = g.vertex_count();
    let mut matrix = vec![vec![0.0f64; n]; n];
    for (u, v) in g.edges() {
        matrix[v as usize][u as usize] = 1.0 / g.degree(u) as f64;
    }
    let mut ranks = vec![1.0 / n as f64; n];
    for _ in 0..max_iterations {
        let next: Vec<f64> = (0..n)
            .map(|v| {
                let pulled: f64 = (0..n).map(|u| matrix[v][u] * ranks[u]).sum();
                (1.0 - damping) / n as f64 + damping * pulled
            })
            .collect();
        let delta = next
            .iter()
            .zip(&ranks)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ranks = next;
        if delta <= tolerance {
            break;
        }
    }
    ranks
}

/// Sparse power iteration over an explicit edge list: the same recurrence as
/// [`dense_pagerank`], usable on graphs too large for a dense matrix.
pub fn edge_list_pagerank(g: &CsrGraph, damping: f64, iterations: usize) -> Vec<f64> {
    let n = g.vertex_count();
    let edges: Vec<Edge> = g.edges().collect();
    let out_degree: Vec<f64> = (0..n as VertexId).map(|v| g.degree(v) as f64).collect();
    let mut ranks = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut next = vec![0.0f64; n];
        for &(u, v) in &edges {
            next[v as usize] += ranks[u as usize] / out_degree[u as usize];
        }
        for r in next.iter_mut() {
            *r = (1.0 - damping) / n as f64 + damping * *r;
        }
        ranks = next;
    }
    ranks
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
