//! Per-level cluster connectivity of the sparsifier.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::LrdHierarchy;
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};

/// Growable edge list with per-node incidence, used as the mutable
/// sparsifier. Edge ids are stable: edges are appended, never removed.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<u32>>,
    lookup: FxHashMap<(u32, u32), u32>,
}

impl EdgeList {
    /// Edge ids follow the order of `g.edges()`.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let n = g.n_nodes();
        let mut adj: Vec<Vec<u32>> = (0..n).map(|u| Vec::with_capacity(g.degree(u))).collect();
        let mut lookup = FxHashMap::default();
        lookup.reserve(g.n_edges());
        for (id, e) in g.edges().iter().enumerate() {
            adj[e.u].push(id as u32);
            adj[e.v].push(id as u32);
            lookup.insert((e.u as u32, e.v as u32), id as u32);
        }
        EdgeList {
            n,
            edges: g.edges().to_vec(),
            adj,
            lookup,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: u32) -> Edge {
        self.edges[id as usize]
    }

    /// Ids of the edges incident to `u`.
    #[inline]
    pub fn incident(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    pub fn find(&self, a: usize, b: usize) -> Option<u32> {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.lookup.get(&(u as u32, v as u32)).copied()
    }

    /// Appends a new edge; parallel edges are refused.
    pub fn insert(&mut self, a: usize, b: usize, w: f64) -> Result<u32> {
        let e = Edge::new(a, b, w);
        let id = self.edges.len() as u32;
        if self.lookup.insert((e.u as u32, e.v as u32), id).is_some() {
            return Err(Error::InternalInconsistency(format!(
                "edge ({}, {}) already present",
                e.u, e.v
            )));
        }
        self.adj[e.u].push(id);
        self.adj[e.v].push(id);
        self.edges.push(e);
        Ok(id)
    }

    /// Room for `extra` more edges without reallocating the edge table.
    pub fn reserve(&mut self, extra: usize) {
        self.edges.reserve(extra);
        self.lookup.reserve(extra);
    }

    #[inline]
    pub fn add_weight(&mut self, id: u32, dw: f64) {
        self.edges[id as usize].w += dw;
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn to_graph(&self) -> WeightedGraph {
        let mut edges = self.edges.clone();
        edges.sort_unstable_by_key(|e| e.key());
        WeightedGraph::from_sorted_edges(self.n, edges)
    }
}

/// Edge ids sharing one index slot. Most slots hold a single edge.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::box_collection)]
enum Bucket {
    One(u32),
    Many(Box<Vec<u32>>),
}

impl Bucket {
    fn push(&mut self, id: u32) {
        match self {
            Bucket::One(first) => *self = Bucket::Many(Box::new(vec![*first, id])),
            Bucket::Many(v) => v.push(id),
        }
    }

    fn as_slice(&self) -> &[u32] {
        match self {
            Bucket::One(x) => std::slice::from_ref(x),
            Bucket::Many(v) => v.as_slice(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct LevelIndex {
    cross: FxHashMap<(u32, u32), Bucket>,
    intra: FxHashMap<u32, Bucket>,
}

/// For each level `1..=L`: cluster pair to crossing edges, and cluster to
/// internal edges. Each sparsifier edge sits in exactly one slot per level.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPairIndex {
    levels: Vec<LevelIndex>,
}

#[inline]
fn pair(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ClusterPairIndex {
    /// Builds the index over `h0`; edge ids are positions in `h0.edges()`.
    pub fn build(h0: &WeightedGraph, hier: &LrdHierarchy) -> Result<Self> {
        if h0.n_nodes() != hier.n_nodes() {
            return Err(Error::NodeSetMismatch(h0.n_nodes(), hier.n_nodes()));
        }
        let edges = h0.edges();
        let levels = (1..=hier.levels())
            .into_par_iter()
            .map(|level| {
                let a = hier.assignment(level);
                let mut lvl = LevelIndex::default();
                for (id, e) in edges.iter().enumerate() {
                    let (ca, cb) = (a[e.u], a[e.v]);
                    if ca == cb {
                        push_slot(&mut lvl.intra, ca, id as u32);
                    } else {
                        push_slot(&mut lvl.cross, pair(ca, cb), id as u32);
                    }
                }
                lvl
            })
            .collect();
        Ok(ClusterPairIndex { levels })
    }

    pub(crate) fn empty(levels: usize) -> Self {
        ClusterPairIndex {
            levels: (0..levels).map(|_| LevelIndex::default()).collect(),
        }
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Room for `extra` more slots per level without rehashing.
    pub fn reserve(&mut self, extra: usize) {
        for lvl in &mut self.levels {
            lvl.cross.reserve(extra.min(lvl.cross.len()));
            lvl.intra.reserve(extra.min(lvl.intra.len()));
        }
    }

    /// Records edge `id = (u, v)` at every level.
    pub fn register_edge(&mut self, hier: &LrdHierarchy, id: u32, u: usize, v: usize) {
        let (ru, rv) = (hier.row(u), hier.row(v));
        for (i, lvl) in self.levels.iter_mut().enumerate() {
            let (a, b) = (ru[i + 1], rv[i + 1]);
            if a == b {
                push_slot(&mut lvl.intra, a, id);
            } else {
                push_slot(&mut lvl.cross, pair(a, b), id);
            }
        }
    }

    /// Edges crossing clusters `a` and `b` at `level` (empty when `a == b`).
    pub fn cross_edges(&self, level: usize, a: u32, b: u32) -> &[u32] {
        self.levels[level - 1]
            .cross
            .get(&pair(a, b))
            .map_or(&[], Bucket::as_slice)
    }

    /// Edges with both endpoints in cluster `c` at `level`.
    pub fn intra_edges(&self, level: usize, c: u32) -> &[u32] {
        self.levels[level - 1].intra.get(&c).map_or(&[], Bucket::as_slice)
    }

    /// Number of cluster pairs with at least one crossing edge.
    pub fn cross_pair_count(&self, level: usize) -> usize {
        self.levels[level - 1].cross.len()
    }

    /// Total number of stored edge references over all levels.
    pub fn entry_count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| {
                l.cross.values().map(|b| b.as_slice().len()).sum::<usize>()
                    + l.intra.values().map(|b| b.as_slice().len()).sum::<usize>()
            })
            .sum()
    }

    /// Cross slots at `level` as `((a, b), ids)`, sorted by pair.
    pub fn cross_slots(&self, level: usize) -> Vec<((u32, u32), &[u32])> {
        let mut v: Vec<_> = self.levels[level - 1]
            .cross
            .iter()
            .map(|(&k, b)| (k, b.as_slice()))
            .collect();
        v.sort_unstable_by_key(|s| s.0);
        v
    }

    /// Intra slots at `level` as `(c, ids)`, sorted by cluster.
    pub fn intra_slots(&self, level: usize) -> Vec<(u32, &[u32])> {
        let mut v: Vec<_> = self.levels[level - 1]
            .intra
            .iter()
            .map(|(&k, b)| (k, b.as_slice()))
            .collect();
        v.sort_unstable_by_key(|s| s.0);
        v
    }

    pub(crate) fn push_cross(&mut self, level: usize, a: u32, b: u32, id: u32) {
        push_slot(&mut self.levels[level - 1].cross, pair(a, b), id);
    }

    pub(crate) fn push_intra(&mut self, level: usize, c: u32, id: u32) {
        push_slot(&mut self.levels[level - 1].intra, c, id);
    }

    /// Verifies that every edge of `edges` occupies exactly the slot its
    /// endpoints' clusters dictate, once per level, and nothing else is
    /// stored.
    pub fn check_consistency(&self, edges: &EdgeList, hier: &LrdHierarchy) -> Result<()> {
        if self.levels() != hier.levels() {
            return Err(Error::InternalInconsistency(format!(
                "index has {} levels, hierarchy {}",
                self.levels(),
                hier.levels()
            )));
        }
        let m = edges.n_edges();
        for level in 1..=self.levels() {
            let mut seen = vec![false; m];
            let lvl = &self.levels[level - 1];
            let slots = lvl
                .cross
                .iter()
                .map(|(&k, b)| (Some(k), None, b))
                .chain(lvl.intra.iter().map(|(&c, b)| (None, Some(c), b)));
            for (key, cluster, bucket) in slots {
                for &id in bucket.as_slice() {
                    let Some(flag) = seen.get_mut(id as usize) else {
                        return Err(Error::InternalInconsistency(format!(
                            "unknown edge id {id} at level {level}"
                        )));
                    };
                    if std::mem::replace(flag, true) {
                        return Err(Error::InternalInconsistency(format!(
                            "edge {id} stored twice at level {level}"
                        )));
                    }
                    let e = edges.edge(id);
                    let (a, b) = (hier.cluster_of(level, e.u), hier.cluster_of(level, e.v));
                    let ok = match (key, cluster) {
                        (Some(k), _) => a != b && pair(a, b) == k,
                        (_, Some(c)) => a == b && a == c,
                        _ => false,
                    };
                    if !ok {
                        return Err(Error::InternalInconsistency(format!(
                            "edge {id} misfiled at level {level}"
                        )));
                    }
                }
            }
            if let Some(id) = seen.iter().position(|&s| !s) {
                return Err(Error::InternalInconsistency(format!(
                    "edge {id} missing at level {level}"
                )));
            }
        }
        Ok(())
    }
}

fn push_slot<K: std::hash::Hash + Eq>(map: &mut FxHashMap<K, Bucket>, key: K, id: u32) {
    map.entry(key)
        .and_modify(|b| b.push(id))
        .or_insert(Bucket::One(id));
}

/// Free-function form of [`ClusterPairIndex::build`].
pub fn build_pair_index(h0: &WeightedGraph, hier: &LrdHierarchy) -> Result<ClusterPairIndex> {
    ClusterPairIndex::build(h0, hier)
}
