//! Weighted undirected graphs in CSR form and their Laplacians.

use std::collections::VecDeque;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights at or below this are treated as degenerate input.
pub const MIN_WEIGHT: f64 = 1e-300;

const PAR_THRESHOLD: usize = 1 << 15;

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge { u, v, w }
    }

    pub fn key(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

/// Immutable weighted undirected graph.
///
/// Edges are kept as a list (one entry per unordered pair, `u < v`) and
/// mirrored into a symmetric CSR adjacency whose entries point back into the
/// edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_ids: Vec<usize>,
}

impl WeightedGraph {
    /// Builds a graph from raw `(u, v, w)` triples, summing parallel entries.
    ///
    /// Self-loops, out-of-range ids and non-positive weights are rejected.
    /// Edge order is canonical (sorted by `(u, v)`), so two graphs with the
    /// same edge set compare equal regardless of input order.
    pub fn from_edges<I>(n: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: FxHashMap<(usize, usize), f64> = FxHashMap::default();
        for (a, b, w) in triples {
            if a >= n {
                return Err(Error::OutOfRange { node: a, n });
            }
            if b >= n {
                return Err(Error::OutOfRange { node: b, n });
            }
            if a == b {
                return Err(Error::SameNode(a));
            }
            if !(w > MIN_WEIGHT) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(w));
            }
            *merged.entry(Edge::new(a, b, w).key()).or_insert(0.0) += w;
        }
        let mut edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), w)| Edge { u, v, w })
            .collect();
        edges.sort_unstable_by_key(|e| e.key());
        Ok(Self::from_sorted_edges(n, edges))
    }

    /// `edges` must already be canonical: `u < v`, sorted, no duplicates.
    pub(crate) fn from_sorted_edges(n: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; 2 * edges.len()];
        let mut edge_ids = vec![0usize; 2 * edges.len()];
        for (id, e) in edges.iter().enumerate() {
            targets[fill[e.u]] = e.v;
            edge_ids[fill[e.u]] = id;
            fill[e.u] += 1;
            targets[fill[e.v]] = e.u;
            edge_ids[fill[e.v]] = id;
            fill[e.v] += 1;
        }
        WeightedGraph {
            n,
            edges,
            offsets,
            targets,
            edge_ids,
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

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Neighbours of `u` as `(neighbour, weight)` pairs.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.edge_ids[range])
            .map(move |(&t, &id)| (t, self.edges[id].w))
    }

    /// Neighbours of `u` as `(neighbour, edge id)` pairs.
    pub fn incident(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_ids[range].iter().copied())
    }

    /// Looks up the edge id joining `a` and `b`, if any.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let (src, dst) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.incident(src).find(|&(t, _)| t == dst).map(|(_, id)| id)
    }

    /// Weighted degree (diagonal of the Laplacian).
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && connected_components(self).len() == 1
    }

    pub fn ensure_connected(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        let comps = connected_components(self).len();
        if comps != 1 {
            return Err(Error::DisconnectedGraph { components: comps });
        }
        Ok(())
    }

    /// Induced subgraph on `nodes`, relabelled to `0..nodes.len()` in the
    /// given order.
    pub fn induced(&self, nodes: &[usize]) -> WeightedGraph {
        let mut relabel = vec![usize::MAX; self.n];
        for (i, &u) in nodes.iter().enumerate() {
            relabel[u] = i;
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| relabel[e.u] != usize::MAX && relabel[e.v] != usize::MAX)
            .map(|e| Edge::new(relabel[e.u], relabel[e.v], e.w))
            .collect();
        edges.sort_unstable_by_key(|e| e.key());
        WeightedGraph::from_sorted_edges(nodes.len(), edges)
    }

    /// Largest connected component (ties broken by smallest contained id).
    pub fn largest_component(&self) -> WeightedGraph {
        let comps = connected_components(self);
        let best = comps
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        match comps.get(best) {
            Some(c) => self.induced(c),
            None => self.clone(),
        }
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightedGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { w: e.w * factor, ..*e })
            .collect();
        WeightedGraph::from_sorted_edges(self.n, edges)
    }

    /// Graph union; weights of shared pairs are summed.
    pub fn with_added_edges<I>(&self, extra: I) -> Result<WeightedGraph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let base = self.edges.iter().map(|e| (e.u, e.v, e.w));
        WeightedGraph::from_edges(self.n, base.chain(extra))
    }

    pub fn laplacian(&self) -> LaplacianOperator<'_> {
        LaplacianOperator { graph: self }
    }
}

/// Matrix-free `L = D - A` for a borrowed graph.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianOperator<'a> {
    graph: &'a WeightedGraph,
}

impl<'a> LaplacianOperator<'a> {
    pub fn graph(&self) -> &'a WeightedGraph {
        self.graph
    }

    pub fn dim(&self) -> usize {
        self.graph.n
    }

    /// `out = L x`, computed row by row over the CSR adjacency.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let g = self.graph;
        let row = |u: usize| -> f64 {
            let xu = x[u];
            let mut acc = 0.0;
            for k in g.offsets[u]..g.offsets[u + 1] {
                acc += g.edges[g.edge_ids[k]].w * (xu - x[g.targets[k]]);
            }
            acc
        };
        if g.n >= PAR_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(u, o)| *o = row(u));
        } else {
            for (u, o) in out.iter_mut().enumerate() {
                *o = row(u);
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.graph.n, x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.graph.n, x.len())?;
        Ok(self.quadratic_form_unchecked(x))
    }

    pub(crate) fn quadratic_form_unchecked(&self, x: &[f64]) -> f64 {
        self.graph
            .edges
            .iter()
            .map(|e| {
                let d = x[e.u] - x[e.v];
                e.w * d * d
            })
            .sum()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `(D - A) x`.
pub fn laplacian_apply(g: &WeightedGraph, x: &[f64]) -> Result<Vec<f64>> {
    g.laplacian().apply(x)
}

/// `x^T L x = sum over edges of w (x_u - x_v)^2`.
pub fn quadratic_form(g: &WeightedGraph, x: &[f64]) -> Result<f64> {
    g.laplacian().quadratic_form(x)
}

/// Connected components by BFS, each sorted, ordered by smallest id.
pub fn connected_components(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for (t, _) in g.incident(u) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn single_edge_apply() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(laplacian_apply(&g, &[1.0, 0.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn ones_in_null_space() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 2.5), (1, 2, 0.3), (2, 3, 7.0), (0, 3, 1.0)])
            .unwrap();
        let y = laplacian_apply(&g, &[1.0; 4]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(quadratic_form(&g, &[3.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn triangle_apply_matches_dense() {
        let y = laplacian_apply(&triangle(), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![2.0, -1.0, -1.0]);
    }

    #[test]
    fn path_quadratic_form() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(quadratic_form(&g, &[0.0, 1.0, 3.0]).unwrap(), 5.0);
        let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(quadratic_form(&g, &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let g = triangle();
        assert!(matches!(
            laplacian_apply(&g, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(quadratic_form(&g, &[1.0]).is_err());
    }

    #[test]
    fn components() {
        let path = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(connected_components(&path), vec![vec![0, 1, 2]]);
        let two = WeightedGraph::from_edges(4, [(2, 3, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(connected_components(&two), vec![vec![0, 1], vec![2, 3]]);
        let empty = WeightedGraph::from_edges(3, std::iter::empty()).unwrap();
        assert_eq!(
            connected_components(&empty),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn parallel_edges_merge() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 1.5), (1, 0, 2.0)]).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.edge(0).w, 3.5);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 0, 1.0)]),
            Err(Error::SameNode(0))
        ));
        assert!(WeightedGraph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::from_edges(2, [(0, 1, 1e-301)]).is_err());
        assert!(WeightedGraph::from_edges(2, [(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn csr_is_symmetric() {
        let g = triangle();
        for u in 0..3 {
            for (v, w) in g.neighbors(u) {
                assert!(g.neighbors(v).any(|(t, wt)| t == u && wt == w));
            }
        }
        assert_eq!(g.find_edge(2, 0), Some(1));
    }

    #[test]
    fn largest_component_extraction() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 2.0)]).unwrap();
        let big = g.largest_component();
        assert_eq!(big.n_nodes(), 3);
        assert_eq!(big.n_edges(), 2);
        assert!(big.is_connected());
        assert!(matches!(
            g.ensure_connected(),
            Err(Error::DisconnectedGraph { components: 2 })
        ));
    }
}
