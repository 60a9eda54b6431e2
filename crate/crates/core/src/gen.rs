//! Deterministic synthetic graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::graph::WeightedGraph;

pub fn path(n: usize) -> WeightedGraph {
    WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
}

pub fn cycle(n: usize) -> WeightedGraph {
    WeightedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
}

pub fn star(n: usize) -> WeightedGraph {
    WeightedGraph::from_edges(n, (1..n).map(|i| (0, i, 1.0))).unwrap()
}

pub fn complete(n: usize) -> WeightedGraph {
    WeightedGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
}

/// Random connected graph with about `n * avg_degree / 2` edges.
///
/// A random recursive tree guarantees connectivity; the remaining edges are
/// uniform node pairs. Weights are uniform in `[lo, hi]` (all `lo` when
/// `lo == hi`).
pub fn random_connected(n: usize, avg_degree: f64, weights: (f64, f64), seed: u64) -> WeightedGraph {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = weights;
    let weight = |rng: &mut ChaCha8Rng| if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let max_edges = n * (n - 1) / 2;
    let m = ((n as f64 * avg_degree / 2.0).round() as usize).clamp(n - 1, max_edges);
    let mut seen = FxHashSet::default();
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let j = rng.random_range(0..i);
        seen.insert((j, i));
        edges.push((j, i, weight(&mut rng)));
    }
    while edges.len() < m {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a.min(b), a.max(b), weight(&mut rng)));
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

/// `rows x cols` grid with one diagonal per cell, its orientation drawn at
/// random, and unit weights. A planar triangle mesh of the kind produced by
/// 2D finite-element discretizations.
pub fn triangulated_grid(rows: usize, cols: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| r * cols + c;
    let mut e = Vec::with_capacity(3 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                e.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < rows {
                e.push((id(r, c), id(r + 1, c), 1.0));
            }
            if r + 1 < rows && c + 1 < cols {
                if rng.random_bool(0.5) {
                    e.push((id(r, c), id(r + 1, c + 1), 1.0));
                } else {
                    e.push((id(r, c + 1), id(r + 1, c), 1.0));
                }
            }
        }
    }
    WeightedGraph::from_edges(rows * cols, e).unwrap()
}

/// Mid-sized 2D finite-element-style mesh: 11130 nodes and 32969
/// edges (density about 2.96).
pub fn fe_like_mesh(seed: u64) -> WeightedGraph {
    triangulated_grid(105, 106, seed)
}

/// 6-regular triangulated torus on `rows * cols` nodes (both at least 3).
pub fn triangulated_torus(rows: usize, cols: usize) -> WeightedGraph {
    assert!(rows >= 3 && cols >= 3);
    let id = |r: usize, c: usize| (r % rows) * cols + (c % cols);
    let mut e = Vec::with_capacity(3 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            e.push((id(r, c), id(r, c + 1), 1.0));
            e.push((id(r, c), id(r + 1, c), 1.0));
            e.push((id(r, c), id(r + 1, c + 1), 1.0));
        }
    }
    WeightedGraph::from_edges(rows * cols, e).unwrap()
}
