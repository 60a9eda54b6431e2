//! Incremental update of a sparsifier from a stream of new edges.
//!
//! Each new edge `(u, v, w)` is scored by `w * bound(u, v)`, where the bound
//! comes from the LRD hierarchy, then filtered at level `F`:
//!
//! * endpoints in different clusters with no sparsifier edge between them:
//!   the edge is inserted;
//! * different clusters already connected: its weight is added to the
//!   heaviest connecting edge;
//! * same cluster: the edge is dropped and its weight is spread over the
//!   shortest intra-cluster path between the endpoints, each path edge
//!   receiving a share proportional to its resistance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{WeightedGraph, MIN_WEIGHT};
use crate::lrd::{ClusterPairIndex, EdgeList, LrdHierarchy, SetupArtifact};

const PAR_BATCH: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decision {
    Inserted,
    /// Weight added to the existing sparsifier edge `(u, v)`.
    MergedInto { u: usize, v: usize },
    /// Weight spread inside this cluster.
    Redistributed { cluster: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    pub distortion_estimate: f64,
    pub decision: Decision,
    pub level_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RedistributionRule {
    /// Along the shortest intra-cluster path, proportional to resistance.
    #[default]
    ShortestPath,
    /// Equal shares over every intra-cluster edge.
    Uniform,
}

/// Largest level whose biggest cluster has at most `floor(c / 2)` nodes,
/// or level 1 when none qualifies.
pub fn choose_filter_level(h: &LrdHierarchy, c: f64) -> Result<usize> {
    if !(c >= 2.0) {
        return Err(Error::InvalidTarget(c));
    }
    let cap = (c / 2.0).floor();
    let best = (1..=h.levels())
        .rev()
        .find(|&l| h.max_cluster_size(l) as f64 <= cap)
        .unwrap_or(1);
    Ok(best)
}

/// Mutable sparsifier plus the setup structures used to filter new edges.
#[derive(Debug, Clone)]
pub struct SparsifierState {
    h: EdgeList,
    hierarchy: LrdHierarchy,
    index: ClusterPairIndex,
    target_condition: f64,
    filter_level: usize,
    rule: RedistributionRule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64, u32);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SparsifierState {
    pub fn new(
        h0: &WeightedGraph,
        hierarchy: LrdHierarchy,
        index: ClusterPairIndex,
        target_condition: f64,
    ) -> Result<Self> {
        if h0.n_nodes() != hierarchy.n_nodes() {
            return Err(Error::NodeSetMismatch(h0.n_nodes(), hierarchy.n_nodes()));
        }
        let filter_level = choose_filter_level(&hierarchy, target_condition)?;
        let mut h = EdgeList::from_graph(h0);
        h.reserve(h0.n_edges());
        let mut index = index;
        index.reserve(h0.n_edges());
        Ok(SparsifierState {
            h,
            hierarchy,
            index,
            target_condition,
            filter_level,
            rule: RedistributionRule::default(),
        })
    }

    pub fn from_setup(art: SetupArtifact, target_condition: f64) -> Result<Self> {
        Self::new(&art.graph, art.hierarchy, art.index, target_condition)
    }

    pub fn with_rule(mut self, rule: RedistributionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn target_condition(&self) -> f64 {
        self.target_condition
    }

    pub fn filter_level(&self) -> usize {
        self.filter_level
    }

    /// Overrides the level chosen from the target condition number.
    pub fn set_filter_level(&mut self, level: usize) -> Result<()> {
        if level == 0 || level > self.hierarchy.levels() {
            return Err(Error::InvalidArgument(format!(
                "filter level {level} outside 1..={}",
                self.hierarchy.levels()
            )));
        }
        self.filter_level = level;
        Ok(())
    }

    pub fn hierarchy(&self) -> &LrdHierarchy {
        &self.hierarchy
    }

    pub fn index(&self) -> &ClusterPairIndex {
        &self.index
    }

    pub fn edges(&self) -> &EdgeList {
        &self.h
    }

    pub fn n_nodes(&self) -> usize {
        self.h.n_nodes()
    }

    pub fn n_edges(&self) -> usize {
        self.h.n_edges()
    }

    pub fn total_weight(&self) -> f64 {
        self.h.total_weight()
    }

    pub fn to_graph(&self) -> WeightedGraph {
        self.h.to_graph()
    }

    pub fn check_consistency(&self) -> Result<()> {
        self.index.check_consistency(&self.h, &self.hierarchy)
    }

    fn validate(&self, u: usize, v: usize, w: f64) -> Result<()> {
        let n = self.h.n_nodes();
        for x in [u, v] {
            if x >= n {
                return Err(Error::OutOfRange { node: x, n });
            }
        }
        if u == v {
            return Err(Error::SameNode(u));
        }
        if !(w > MIN_WEIGHT) || !w.is_finite() {
            return Err(Error::NonPositiveWeight(w));
        }
        Ok(())
    }

    /// `w` times the hierarchy's resistance bound for `(u, v)`.
    pub fn estimate_distortion(&self, u: usize, v: usize, w: f64) -> Result<f64> {
        Ok(w * self.hierarchy.resistance_upper_bound(u, v)?)
    }

    /// Filters one new edge and applies the resulting change to the
    /// sparsifier.
    pub fn process_edge(&mut self, u: usize, v: usize, w: f64) -> Result<EdgeEvent> {
        self.validate(u, v, w)?;
        let distortion = w * self.hierarchy.bound_unchecked(u, v);
        let level = self.filter_level;
        let a = self.hierarchy.row(u)[level];
        let b = self.hierarchy.row(v)[level];
        let decision = if a != b {
            let target = self
                .index
                .cross_edges(level, a, b)
                .iter()
                .map(|&id| (id, self.h.edge(id)))
                .max_by(|x, y| {
                    x.1.w
                        .total_cmp(&y.1.w)
                        .then(y.1.key().cmp(&x.1.key()))
                });
            match target {
                None => {
                    let id = self.h.insert(u, v, w)?;
                    self.index.register_edge(&self.hierarchy, id, u, v);
                    Decision::Inserted
                }
                Some((id, e)) => {
                    self.h.add_weight(id, w);
                    Decision::MergedInto { u: e.u, v: e.v }
                }
            }
        } else {
            match self.rule {
                RedistributionRule::ShortestPath => self.spread_along_path(level, a, u, v, w)?,
                RedistributionRule::Uniform => self.spread_uniform(level, a, w)?,
            }
            Decision::Redistributed { cluster: a }
        };
        Ok(EdgeEvent {
            u,
            v,
            w,
            distortion_estimate: distortion,
            decision,
            level_used: level,
        })
    }

    fn spread_uniform(&mut self, level: usize, c: u32, w: f64) -> Result<()> {
        let ids = self.index.intra_edges(level, c).to_vec();
        if ids.is_empty() {
            return Err(Error::InternalInconsistency(format!(
                "cluster {c} at level {level} has no internal edges"
            )));
        }
        let share = w / ids.len() as f64;
        ids.into_iter().for_each(|id| self.h.add_weight(id, share));
        Ok(())
    }

    /// Dijkstra with edge lengths `1 / w`, restricted to cluster `c`.
    fn intra_path(&self, level: usize, c: u32, s: usize, t: usize) -> Option<Vec<u32>> {
        let assign = self.hierarchy.assignment(level);
        let mut dist: FxHashMap<u32, (f64, u32)> = FxHashMap::default();
        let mut heap = BinaryHeap::new();
        dist.insert(s as u32, (0.0, u32::MAX));
        heap.push(Dist(0.0, s as u32));
        while let Some(Dist(d, x)) = heap.pop() {
            if x as usize == t {
                break;
            }
            if dist.get(&x).is_some_and(|&(best, _)| d > best) {
                continue;
            }
            for &id in self.h.incident(x as usize) {
                let e = self.h.edge(id);
                let y = if e.u == x as usize { e.v } else { e.u };
                if assign[y] != c {
                    continue;
                }
                let nd = d + 1.0 / e.w;
                let better = dist.get(&(y as u32)).is_none_or(|&(old, _)| nd < old);
                if better {
                    dist.insert(y as u32, (nd, id));
                    heap.push(Dist(nd, y as u32));
                }
            }
        }
        dist.get(&(t as u32))?;
        let mut path = Vec::new();
        let mut x = t;
        while x != s {
            let id = dist[&(x as u32)].1;
            path.push(id);
            let e = self.h.edge(id);
            x = if e.u == x { e.v } else { e.u };
        }
        Some(path)
    }

    fn spread_along_path(&mut self, level: usize, c: u32, u: usize, v: usize, w: f64) -> Result<()> {
        let path = self.intra_path(level, c, u, v).ok_or_else(|| {
            Error::InternalInconsistency(format!(
                "no path between {u} and {v} inside cluster {c} at level {level}"
            ))
        })?;
        let total: f64 = path.iter().map(|&id| 1.0 / self.h.edge(id).w).sum();
        let shares: Vec<f64> = path.iter().map(|&id| w * (1.0 / self.h.edge(id).w) / total).collect();
        for (&id, dw) in path.iter().zip(shares) {
            self.h.add_weight(id, dw);
        }
        Ok(())
    }

    /// Processes a batch in order of decreasing estimated distortion (ties:
    /// heavier edge first, then smaller endpoint ids). The batch is checked
    /// in full before any change is made.
    pub fn ingrass_update(&mut self, batch: &[(usize, usize, f64)]) -> Result<Vec<EdgeEvent>> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty update batch".into()));
        }
        for &(u, v, w) in batch {
            self.validate(u, v, w)?;
        }
        let score = |&(u, v, w): &(usize, usize, f64)| w * self.hierarchy.bound_unchecked(u, v);
        let dist: Vec<f64> = if batch.len() >= PAR_BATCH {
            batch.par_iter().map(score).collect()
        } else {
            batch.iter().map(score).collect()
        };
        let key = |i: usize| {
            let (u, v, _) = batch[i];
            (u.min(v), u.max(v))
        };
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.sort_by(|&i, &j| {
            dist[j]
                .total_cmp(&dist[i])
                .then(batch[j].2.total_cmp(&batch[i].2))
                .then(key(i).cmp(&key(j)))
                .then(i.cmp(&j))
        });
        order
            .into_iter()
            .map(|i| {
                let (u, v, w) = batch[i];
                self.process_edge(u, v, w)
            })
            .collect()
    }
}

/// Free-function form of [`SparsifierState::ingrass_update`].
pub fn ingrass_update(s: &mut SparsifierState, batch: &[(usize, usize, f64)]) -> Result<Vec<EdgeEvent>> {
    s.ingrass_update(batch)
}

/// Free-function form of [`SparsifierState::process_edge`].
pub fn process_edge(s: &mut SparsifierState, u: usize, v: usize, w: f64) -> Result<EdgeEvent> {
    s.process_edge(u, v, w)
}

/// Free-function form of [`SparsifierState::estimate_distortion`].
pub fn estimate_distortion(s: &SparsifierState, u: usize, v: usize, w: f64) -> Result<f64> {
    s.estimate_distortion(u, v, w)
}
