//! Multilevel low-resistance-diameter (LRD) decomposition.
//!
//! Clusters are grown by contracting sparsifier edges in ascending order of
//! estimated resistance. Two clusters `a`, `b` joined by edge `e` merge at
//! level `l` only when
//!
//! ```text
//! diam(a) + diam(b) + R(e) <= d_l
//! ```
//!
//! and the left-hand side becomes the diameter of the merged cluster. By the
//! triangle inequality of the resistance metric this stays an upper bound on
//! the resistance between any two of its members whenever `R` is exact.
//! Thresholds grow geometrically from the median edge estimate.
//!
//! Cluster ids are the smallest node id contained in the cluster, so the
//! per-node embedding vector is `[assignment[1][u], ..., assignment[L][u]]`.

mod index;
mod persist;

pub use index::{build_pair_index, ClusterPairIndex, EdgeList};
pub use persist::{load_setup, save_setup, SetupArtifact, SETUP_MAGIC, SETUP_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::resistance::ResistanceEstimator;
use crate::stats::median;
use crate::unionfind::UnionFind;

const PAR_EDGES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrdConfig {
    /// Number of levels `L`; `None` picks `ceil(log2 N)`.
    pub levels: Option<usize>,
    /// Upper bound applied to the automatic level count.
    pub max_levels: usize,
    /// Geometric threshold growth between consecutive levels.
    pub growth: f64,
}

impl Default for LrdConfig {
    fn default() -> Self {
        LrdConfig {
            levels: None,
            max_levels: 32,
            growth: 2.0,
        }
    }
}

impl LrdConfig {
    pub fn resolve_levels(&self, n: usize) -> usize {
        match self.levels {
            Some(l) => l,
            None => {
                let auto = (n.max(2) as f64).log2().ceil() as usize;
                auto.clamp(2, self.max_levels.max(2))
            }
        }
    }
}

/// One contraction performed during decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub level: u32,
    pub u: u32,
    pub v: u32,
    /// Estimated resistance of the contracted edge.
    pub resistance: f64,
    /// Diameter bound recorded for the merged cluster.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrdHierarchy {
    pub(crate) n: usize,
    pub(crate) growth: f64,
    /// `thresholds[l]` for `l in 0..=L`; level 0 has threshold 0.
    pub(crate) thresholds: Vec<f64>,
    /// `assignment[l][u]` for `l in 0..=L`.
    pub(crate) assignment: Vec<Vec<u32>>,
    /// `diameter[l][c]`, indexed by cluster id; zero for non-ids.
    pub(crate) diameter: Vec<Vec<f64>>,
    /// `size[l][c]`, indexed by cluster id; zero for non-ids.
    pub(crate) size: Vec<Vec<u32>>,
    pub(crate) merges: Vec<MergeRecord>,
    /// Node-major copy of `assignment`: row `u` holds levels `0..=L`.
    pub(crate) rows: Vec<u32>,
}

pub(crate) fn node_major(assignment: &[Vec<u32>], n: usize) -> Vec<u32> {
    let stride = assignment.len();
    let mut rows = vec![0u32; n * stride];
    for (l, a) in assignment.iter().enumerate() {
        for (u, &c) in a.iter().enumerate() {
            rows[u * stride + l] = c;
        }
    }
    rows
}

impl LrdHierarchy {
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Number of levels above the identity level.
    pub fn levels(&self) -> usize {
        self.assignment.len() - 1
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn threshold(&self, level: usize) -> f64 {
        self.thresholds[level]
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn merges(&self) -> &[MergeRecord] {
        &self.merges
    }

    #[inline]
    pub fn cluster_of(&self, level: usize, u: usize) -> u32 {
        self.assignment[level][u]
    }

    /// Cluster ids of `u` at levels `0..=L`.
    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u32] {
        let stride = self.assignment.len();
        &self.rows[u * stride..(u + 1) * stride]
    }

    pub fn assignment(&self, level: usize) -> &[u32] {
        &self.assignment[level]
    }

    pub fn diameter(&self, level: usize, cluster: u32) -> f64 {
        self.diameter[level][cluster as usize]
    }

    pub fn cluster_size(&self, level: usize, cluster: u32) -> usize {
        self.size[level][cluster as usize] as usize
    }

    pub fn max_cluster_size(&self, level: usize) -> usize {
        self.size[level].iter().copied().max().unwrap_or(0) as usize
    }

    pub fn cluster_count(&self, level: usize) -> usize {
        self.size[level].iter().filter(|&&s| s > 0).count()
    }

    /// Cluster ids of `u` at levels `1..=L` (or `0..=L` with `include_base`).
    pub fn embedding_vector(&self, u: usize, include_base: bool) -> Result<Vec<u32>> {
        if u >= self.n {
            return Err(Error::OutOfRange { node: u, n: self.n });
        }
        let start = if include_base { 0 } else { 1 };
        Ok(self.row(u)[start..].to_vec())
    }

    /// Lowest level at which `p` and `q` share a cluster.
    #[inline]
    pub fn shared_level(&self, p: usize, q: usize) -> Option<usize> {
        // nesting makes "shared" monotone in the level
        let (a, b) = (self.row(p), self.row(q));
        let top = self.levels();
        if a[top] != b[top] {
            return None;
        }
        Some((1..top).find(|&l| a[l] == b[l]).unwrap_or(top))
    }

    /// Bound used when the top level still separates `p` and `q`.
    pub fn fallback_bound(&self) -> f64 {
        self.thresholds[self.levels()] * self.growth
    }

    /// Upper bound on `R(p, q)`: the diameter of the lowest shared cluster.
    pub fn resistance_upper_bound(&self, p: usize, q: usize) -> Result<f64> {
        for x in [p, q] {
            if x >= self.n {
                return Err(Error::OutOfRange { node: x, n: self.n });
            }
        }
        if p == q {
            return Err(Error::SameNode(p));
        }
        Ok(self.bound_unchecked(p, q))
    }

    #[inline]
    pub(crate) fn bound_unchecked(&self, p: usize, q: usize) -> f64 {
        match self.shared_level(p, q) {
            Some(l) => self.diameter[l][self.row(p)[l] as usize],
            None => self.fallback_bound(),
        }
    }
}

/// Runs the multilevel decomposition of `h0` using `est` for edge
/// resistances.
pub fn lrd_decompose<E>(h0: &WeightedGraph, est: &E, cfg: &LrdConfig) -> Result<LrdHierarchy>
where
    E: ResistanceEstimator + ?Sized,
{
    let n = h0.n_nodes();
    if est.n_nodes() != n {
        return Err(Error::EmbedderMismatch {
            embedder: est.n_nodes(),
            graph: n,
        });
    }
    if !h0.is_connected() {
        return Err(Error::NotConnected);
    }
    if !(cfg.growth > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold growth must exceed 1, got {}",
            cfg.growth
        )));
    }
    let levels = cfg.resolve_levels(n);
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "at least 2 levels required, got {levels}"
        )));
    }

    // S1: score every edge once; endpoint estimates do not change between levels
    let edges = h0.edges();
    let score = |i: usize| {
        let e = edges[i];
        est.resistance(e.u, e.v)
    };
    let r: Vec<f64> = if edges.len() >= PAR_EDGES {
        (0..edges.len()).into_par_iter().map(score).collect()
    } else {
        (0..edges.len()).map(score).collect()
    };
    let mut active: Vec<(f64, u32, u32)> = edges
        .iter()
        .zip(&r)
        .map(|(e, &x)| (x, e.u as u32, e.v as u32))
        .collect();
    active.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let base = {
        let m = median(&r);
        if m > 0.0 && m.is_finite() {
            m
        } else {
            r.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min).min(1.0)
        }
    };

    let mut uf = UnionFind::new(n);
    let mut diam = vec![0.0f64; n];
    let mut min_id: Vec<u32> = (0..n as u32).collect();
    let mut thresholds = Vec::with_capacity(levels + 1);
    let mut assignment = Vec::with_capacity(levels + 1);
    let mut diameter = Vec::with_capacity(levels + 1);
    let mut size = Vec::with_capacity(levels + 1);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    thresholds.push(0.0);
    assignment.push((0..n as u32).collect::<Vec<u32>>());
    diameter.push(vec![0.0; n]);
    size.push(vec![1u32; n]);

    let mut clusters = n;
    for level in 1..=levels {
        let t = base * cfg.growth.powi(level as i32 - 1);
        thresholds.push(t);

        if clusters > 1 {
            // S2/S3: contract in ascending resistance order under the cap
            for &(ri, u, v) in &active {
                if ri > t {
                    break;
                }
                let (a, b) = (uf.find(u as usize), uf.find(v as usize));
                if a == b {
                    continue;
                }
                let bound = diam[a] + diam[b] + ri;
                if bound <= t {
                    let lo = min_id[a].min(min_id[b]);
                    let root = uf.union_roots(a, b);
                    diam[root] = bound;
                    min_id[root] = lo;
                    clusters -= 1;
                    merges.push(MergeRecord {
                        level: level as u32,
                        u,
                        v,
                        resistance: ri,
                        bound,
                    });
                }
            }
            active.retain(|&(_, u, v)| uf.find(u as usize) != uf.find(v as usize));
        }

        let prev = assignment.len() - 1;
        if assignment.len() > 1 && merges.last().is_none_or(|m| (m.level as usize) < level) {
            // nothing merged at this level
            assignment.push(assignment[prev].clone());
            diameter.push(diameter[prev].clone());
            size.push(size[prev].clone());
            continue;
        }
        let mut a = vec![0u32; n];
        let mut d = vec![0.0f64; n];
        let mut s = vec![0u32; n];
        for (u, slot) in a.iter_mut().enumerate() {
            let root = uf.find(u);
            let c = min_id[root];
            *slot = c;
            d[c as usize] = diam[root];
            s[c as usize] += 1;
        }
        assignment.push(a);
        diameter.push(d);
        size.push(s);
    }

    Ok(LrdHierarchy {
        n,
        growth: cfg.growth,
        thresholds,
        rows: node_major(&assignment, n),
        assignment,
        diameter,
        size,
        merges,
    })
}

/// Free-function form of [`LrdHierarchy::embedding_vector`] (levels `1..=L`).
pub fn embedding_vector(h: &LrdHierarchy, u: usize) -> Result<Vec<u32>> {
    h.embedding_vector(u, false)
}

/// Free-function form of [`LrdHierarchy::resistance_upper_bound`].
pub fn resistance_upper_bound(h: &LrdHierarchy, p: usize, q: usize) -> Result<f64> {
    h.resistance_upper_bound(p, q)
}
