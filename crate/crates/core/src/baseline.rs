//! Initial sparsifiers and the random-inclusion comparator.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cg::{LaplacianSolver, Preconditioner};
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::resistance::ResistanceEstimator;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Spanning tree plus off-tree edges added over several rounds. Each
    /// round scores the remaining edges against the current sparsifier with
    /// a few steps of generalized power iteration and skips candidates whose
    /// endpoints lie near an edge already picked in that round.
    #[default]
    Spectral,
    /// Spanning tree plus off-tree edges by decreasing `w * R`.
    TreePlusDistortion,
    /// Spanning tree plus uniformly random off-tree edges.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsifierConfig {
    /// Edges per node in the output.
    pub target_density: f64,
    pub seed: u64,
    pub strategy: Strategy,
    /// [`Strategy::Spectral`] only.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_power_steps")]
    pub power_steps: usize,
    /// Hop radius around a picked edge's endpoints that blocks further picks
    /// within the same round.
    #[serde(default = "default_exclusion_radius")]
    pub exclusion_radius: usize,
}

fn default_rounds() -> usize {
    10
}

fn default_power_steps() -> usize {
    3
}

fn default_exclusion_radius() -> usize {
    3
}

impl SparsifierConfig {
    pub fn new(target_density: f64, seed: u64, strategy: Strategy) -> Self {
        SparsifierConfig {
            target_density,
            seed,
            strategy,
            rounds: default_rounds(),
            power_steps: default_power_steps(),
            exclusion_radius: default_exclusion_radius(),
        }
    }

    /// Target given as edges beyond a spanning tree, per node.
    pub fn from_extra_density(n: usize, extra: f64, seed: u64, strategy: Strategy) -> Self {
        Self::new((n as f64 - 1.0) / n as f64 + extra, seed, strategy)
    }
}

/// Edge ids of a maximum-weight spanning forest (Kruskal; ties by `(u, v)`).
pub fn max_spanning_tree(g: &WeightedGraph) -> Vec<usize> {
    let edges = g.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    // edges are sorted by (u, v), so a stable sort keeps that tie order
    order.sort_by(|&a, &b| edges[b].w.total_cmp(&edges[a].w));
    let mut uf = UnionFind::new(g.n_nodes());
    order
        .into_iter()
        .filter(|&id| uf.union(edges[id].u, edges[id].v))
        .collect()
}

/// Builds an initial sparsifier with `round(target_density * n)` edges.
///
/// `est` scores off-tree edges for [`Strategy::TreePlusDistortion`]; the
/// other strategies ignore it.
pub fn baseline_sparsify<E>(g: &WeightedGraph, cfg: &SparsifierConfig, est: &E) -> Result<WeightedGraph>
where
    E: ResistanceEstimator + ?Sized,
{
    let n = g.n_nodes();
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let min = (n as f64 - 1.0) / n as f64;
    let want = (cfg.target_density * n as f64).round() as usize;
    if want < n - 1 {
        return Err(Error::DensityTooLow {
            target: cfg.target_density,
            min,
        });
    }
    if want >= g.n_edges() {
        return Ok(g.clone());
    }
    if cfg.strategy == Strategy::TreePlusDistortion && est.n_nodes() != n {
        return Err(Error::EmbedderMismatch {
            embedder: est.n_nodes(),
            graph: n,
        });
    }
    let tree = max_spanning_tree(g);
    let mut keep = vec![false; g.n_edges()];
    tree.iter().for_each(|&id| keep[id] = true);
    let mut off: Vec<usize> = (0..g.n_edges()).filter(|&id| !keep[id]).collect();
    let extra = want - tree.len();
    match cfg.strategy {
        Strategy::TreePlusDistortion => {
            let score: Vec<f64> = off
                .iter()
                .map(|&id| {
                    let e = g.edge(id);
                    e.w * est.resistance(e.u, e.v)
                })
                .collect();
            let mut order: Vec<usize> = (0..off.len()).collect();
            order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(off[a].cmp(&off[b])));
            order[..extra].iter().for_each(|&i| keep[off[i]] = true);
        }
        Strategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            off.shuffle(&mut rng);
            off[..extra].iter().for_each(|&id| keep[id] = true);
        }
        Strategy::Spectral => spectral_rounds(g, cfg, extra, &mut keep)?,
    }
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| *e)
        .collect();
    Ok(WeightedGraph::from_sorted_edges(n, edges))
}

fn subgraph(g: &WeightedGraph, keep: &[bool]) -> WeightedGraph {
    let edges = g.edges().iter().zip(keep).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
    WeightedGraph::from_sorted_edges(g.n_nodes(), edges)
}

fn spectral_rounds(g: &WeightedGraph, cfg: &SparsifierConfig, extra: usize, keep: &mut [bool]) -> Result<()> {
    let n = g.n_nodes();
    let rounds = cfg.rounds.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lg = g.laplacian();
    let mut added = 0;
    let mut blocked = vec![false; n];
    let mut hops = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut b = vec![0.0; n];
    for round in 0..rounds {
        let budget = extra * (round + 1) / rounds - added;
        if budget == 0 {
            continue;
        }
        let h = subgraph(g, keep);
        let solver = LaplacianSolver::new(&h, Preconditioner::SpanningTree, 1e-6)?;
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..cfg.power_steps.max(1) {
            lg.apply_into(&x, &mut b);
            solver.solve_into(&b, &mut x)?;
        }
        let mut cand: Vec<(f64, usize)> = (0..g.n_edges())
            .filter(|&id| !keep[id])
            .map(|id| {
                let e = g.edge(id);
                (e.w * (x[e.u] - x[e.v]).powi(2), id)
            })
            .collect();
        cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        blocked.fill(false);
        let mut took = 0;
        for &(_, id) in &cand {
            if took == budget {
                break;
            }
            let e = g.edge(id);
            if blocked[e.u] || blocked[e.v] {
                continue;
            }
            keep[id] = true;
            took += 1;
            for s in [e.u, e.v] {
                block_ball(g, s, cfg.exclusion_radius, &mut blocked, &mut hops, &mut queue);
            }
        }
        // fill any remaining budget by score
        for &(_, id) in &cand {
            if took == budget {
                break;
            }
            if !keep[id] {
                keep[id] = true;
                took += 1;
            }
        }
        added += took;
    }
    Ok(())
}

fn block_ball(
    g: &WeightedGraph,
    s: usize,
    radius: usize,
    blocked: &mut [bool],
    hops: &mut [usize],
    queue: &mut VecDeque<usize>,
) {
    let mut seen = vec![s];
    hops[s] = 0;
    queue.push_back(s);
    while let Some(x) = queue.pop_front() {
        blocked[x] = true;
        if hops[x] == radius {
            continue;
        }
        for (t, _) in g.neighbors(x) {
            if hops[t] == usize::MAX {
                hops[t] = hops[x] + 1;
                seen.push(t);
                queue.push_back(t);
            }
        }
    }
    seen.into_iter().for_each(|u| hops[u] = usize::MAX);
}

/// Exact resistances in a spanning tree of `g`, answered through lowest
/// common ancestors. On a tree this is the resistance distance, and for an
/// off-tree edge `w * R_T(u, v)` is its stretch.
pub struct TreeResistance {
    depth: Vec<u32>,
    /// Resistance from the root.
    dist: Vec<f64>,
    /// `up[k][u]` is the `2^k`-th ancestor of `u`.
    up: Vec<Vec<u32>>,
}

impl TreeResistance {
    /// Uses the maximum-weight spanning tree of `g`.
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        let n = g.n_nodes();
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for e in max_spanning_tree(g).into_iter().map(|id| g.edge(id)) {
            adj[e.u].push((e.v as u32, e.w));
            adj[e.v].push((e.u as u32, e.w));
        }
        let mut parent = vec![u32::MAX; n];
        let mut depth = vec![0u32; n];
        let mut dist = vec![0.0; n];
        let mut queue = vec![0u32];
        parent[0] = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &(t, w) in &adj[u] {
                let t = t as usize;
                if parent[t] == u32::MAX {
                    parent[t] = u as u32;
                    depth[t] = depth[u] + 1;
                    dist[t] = dist[u] + 1.0 / w;
                    queue.push(t as u32);
                }
            }
        }
        let lg = (usize::BITS - n.max(2).leading_zeros()) as usize;
        let mut up = vec![parent];
        for k in 1..lg {
            let prev = &up[k - 1];
            let next = prev.iter().map(|&p| prev[p as usize]).collect();
            up.push(next);
        }
        Ok(TreeResistance { depth, dist, up })
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[k][a] as usize;
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..self.up.len()).rev() {
            let (x, y) = (self.up[k][a], self.up[k][b]);
            if x != y {
                a = x as usize;
                b = y as usize;
            }
        }
        self.up[0][a] as usize
    }
}

impl ResistanceEstimator for TreeResistance {
    fn n_nodes(&self) -> usize {
        self.depth.len()
    }

    fn resistance(&self, p: usize, q: usize) -> f64 {
        let l = self.lca(p, q);
        self.dist[p] + self.dist[q] - 2.0 * self.dist[l]
    }
}

/// Adds the first `round(fraction * len)` edges of a seeded shuffle of
/// `batch` to `h`, summing weights on shared pairs. For a fixed seed the
/// selected sets are nested in `fraction`.
pub fn random_include(
    h: &WeightedGraph,
    batch: &[(usize, usize, f64)],
    fraction: f64,
    seed: u64,
) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let count = (fraction * batch.len() as f64).round() as usize;
    random_include_count(h, batch, count, seed)
}

/// [`random_include`] with an explicit edge count.
pub fn random_include_count(
    h: &WeightedGraph,
    batch: &[(usize, usize, f64)],
    count: usize,
    seed: u64,
) -> Result<WeightedGraph> {
    let perm = random_order(batch.len(), seed);
    h.with_added_edges(perm[..count.min(batch.len())].iter().map(|&i| batch[i]))
}

/// The seeded permutation used by [`random_include`].
pub fn random_order(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}
