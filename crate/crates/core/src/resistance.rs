//! Effective-resistance estimation.
//!
//! [`ResistanceEmbedder`] approximates Laplacian eigenvectors with an
//! orthonormal Krylov basis grown from one seeded Gaussian start vector and
//! answers
//!
//! ```text
//! R(p, q) ~ sum_i (u_i[p] - u_i[q])^2 / (u_i^T L u_i)
//! ```
//!
//! in `O(m)` per query. The constant vector is deflated before
//! orthonormalization; its Rayleigh quotient is zero and `b_pq` has no
//! component along it.
//!
//! [`ExactResistance`] is the dense spectral oracle used by the tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::{LaplacianSpectrum, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Anything that can answer pairwise resistance queries.
pub trait ResistanceEstimator: Sync {
    fn n_nodes(&self) -> usize;

    /// Resistance estimate between two distinct in-range nodes.
    fn resistance(&self, p: usize, q: usize) -> f64;
}

/// Operator used to grow the Krylov sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KrylovOperator {
    /// Raw adjacency matrix `A`.
    Adjacency,
    /// Lazy random walk `(I + D^{-1} A) / 2`.
    #[default]
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KrylovConfig {
    /// Krylov order `m`.
    pub order: usize,
    pub operator: KrylovOperator,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig {
            order: 8,
            operator: KrylovOperator::default(),
        }
    }
}

impl KrylovConfig {
    pub fn with_order(order: usize) -> Self {
        KrylovConfig {
            order,
            ..Default::default()
        }
    }
}

const DROP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceEmbedder {
    n: usize,
    vectors: Vec<Vec<f64>>,
    rayleigh: Vec<f64>,
    /// Node-major `u_i[p] / sqrt(rayleigh_i)`.
    coords: Vec<f64>,
}

impl ResistanceEmbedder {
    /// Rebuilds an embedder from stored vectors and Rayleigh quotients.
    pub fn from_parts(n: usize, vectors: Vec<Vec<f64>>, rayleigh: Vec<f64>) -> Result<Self> {
        if vectors.len() != rayleigh.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                got: rayleigh.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let k = vectors.len();
        let mut coords = vec![0.0; n * k];
        for (i, (v, &rq)) in vectors.iter().zip(&rayleigh).enumerate() {
            let s = rq.sqrt().recip();
            for p in 0..n {
                coords[p * k + i] = v[p] * s;
            }
        }
        Ok(ResistanceEmbedder {
            n,
            vectors,
            rayleigh,
            coords,
        })
    }

    /// Number of retained vectors.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn rayleigh(&self) -> &[f64] {
        &self.rayleigh
    }

    pub fn estimate(&self, p: usize, q: usize) -> Result<f64> {
        if p >= self.n {
            return Err(Error::OutOfRange { node: p, n: self.n });
        }
        if q >= self.n {
            return Err(Error::OutOfRange { node: q, n: self.n });
        }
        if p == q {
            return Err(Error::SameNode(p));
        }
        Ok(self.resistance(p, q))
    }
}

impl ResistanceEstimator for ResistanceEmbedder {
    fn n_nodes(&self) -> usize {
        self.n
    }

    #[inline]
    fn resistance(&self, p: usize, q: usize) -> f64 {
        let k = self.vectors.len();
        let a = &self.coords[p * k..(p + 1) * k];
        let b = &self.coords[q * k..(q + 1) * k];
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn apply_operator(g: &WeightedGraph, op: KrylovOperator, degrees: &[f64], x: &[f64], out: &mut [f64]) {
    for (u, o) in out.iter_mut().enumerate() {
        let ax: f64 = g.neighbors(u).map(|(t, w)| w * x[t]).sum();
        *o = match op {
            KrylovOperator::Adjacency => ax,
            KrylovOperator::Smoothed => 0.5 * (x[u] + ax / degrees[u]),
        };
    }
}

/// Builds the Krylov resistance embedder for `g`.
///
/// Each new direction is the operator applied to the previous orthonormal
/// vector, then orthogonalized against the constant vector and all kept
/// vectors with two passes of modified Gram-Schmidt. This spans the same
/// space as `x, Ax, ..., A^{m-1} x`. A direction whose norm falls below
/// `1e-10` of its pre-projection norm means an invariant subspace was hit;
/// the sequence then continues from a fresh seeded Gaussian vector.
pub fn build_embedder(g: &WeightedGraph, cfg: &KrylovConfig, seed: u64) -> Result<ResistanceEmbedder> {
    if cfg.order < 2 {
        return Err(Error::InvalidArgument(format!(
            "krylov order must be at least 2, got {}",
            cfg.order
        )));
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let n = g.n_nodes();
    let degrees = g.weighted_degrees();
    let lap = g.laplacian();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    };
    let mut v = gaussian(&mut rng);
    let target = cfg.order.min(n - 1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(target);
    let mut scratch = vec![0.0; n];
    let mut restarts = 0;

    while basis.len() < target {
        let before = norm(&v);
        for _pass in 0..2 {
            remove_mean(&mut v);
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let after = norm(&v);
        if !(after > DROP_TOL * before) || after == 0.0 {
            // invariant subspace reached: continue from a fresh direction
            if restarts == cfg.order {
                break;
            }
            restarts += 1;
            v = gaussian(&mut rng);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= after);
        apply_operator(g, cfg.operator, &degrees, &v, &mut scratch);
        basis.push(std::mem::replace(&mut v, scratch.clone()));
    }

    let mut vectors = Vec::with_capacity(basis.len());
    let mut rayleigh = Vec::with_capacity(basis.len());
    for q in basis {
        let rq = lap.quadratic_form_unchecked(&q);
        if rq > 0.0 {
            vectors.push(q);
            rayleigh.push(rq);
        }
    }
    // the complement of the constant vector has dimension n - 1
    let needed = 2.min(n.saturating_sub(1));
    if vectors.len() < needed || vectors.is_empty() {
        return Err(Error::DegenerateSubspace { kept: vectors.len() });
    }
    ResistanceEmbedder::from_parts(n, vectors, rayleigh)
}

/// `R(p, q)` from the Krylov embedder.
pub fn estimate_resistance(e: &ResistanceEmbedder, g: &WeightedGraph, p: usize, q: usize) -> Result<f64> {
    if e.n_nodes() != g.n_nodes() {
        return Err(Error::EmbedderMismatch {
            embedder: e.n_nodes(),
            graph: g.n_nodes(),
        });
    }
    e.estimate(p, q)
}

/// Exact effective resistances from the full Laplacian eigendecomposition:
/// `R(p, q) = sum_{i >= 2} (u_i^T b_pq)^2 / lambda_i`.
#[derive(Debug, Clone)]
pub struct ExactResistance {
    spectrum: LaplacianSpectrum,
}

impl ExactResistance {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Self::with_cap(g, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(g: &WeightedGraph, cap: usize) -> Result<Self> {
        Ok(ExactResistance {
            spectrum: LaplacianSpectrum::new(g, cap)?,
        })
    }

    pub fn spectrum(&self) -> &LaplacianSpectrum {
        &self.spectrum
    }

    pub fn get(&self, p: usize, q: usize) -> Result<f64> {
        let n = self.spectrum.n();
        for x in [p, q] {
            if x >= n {
                return Err(Error::OutOfRange { node: x, n });
            }
        }
        if p == q {
            return Err(Error::SameNode(p));
        }
        Ok(self.resistance(p, q))
    }
}

impl ResistanceEstimator for ExactResistance {
    fn n_nodes(&self) -> usize {
        self.spectrum.n()
    }

    fn resistance(&self, p: usize, q: usize) -> f64 {
        (1..self.spectrum.n())
            .map(|i| self.spectrum.term(i, p, q))
            .sum()
    }
}

/// One-off exact resistance with the default size cap.
pub fn exact_resistance(g: &WeightedGraph, p: usize, q: usize) -> Result<f64> {
    if p == q {
        return Err(Error::SameNode(p));
    }
    ExactResistance::new(g)?.get(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn complete(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0))))
            .unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let g = path(40);
        let a = build_embedder(&g, &KrylovConfig::with_order(8), 7).unwrap();
        let b = build_embedder(&g, &KrylovConfig::with_order(8), 7).unwrap();
        assert_eq!(a, b);
        let c = build_embedder(&g, &KrylovConfig::with_order(8), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn orthonormal_and_deflated() {
        let g = path(100);
        for op in [KrylovOperator::Adjacency, KrylovOperator::Smoothed] {
            let cfg = KrylovConfig { order: 8, operator: op };
            let e = build_embedder(&g, &cfg, 3).unwrap();
            assert_eq!(e.dim(), 8);
            for (i, a) in e.vectors().iter().enumerate() {
                assert!((norm(a) - 1.0).abs() < 1e-8);
                assert!(a.iter().sum::<f64>().abs() < 1e-8);
                for b in &e.vectors()[i + 1..] {
                    assert!(dot(a, b).abs() < 1e-8);
                }
            }
            assert!(e.rayleigh().iter().all(|&r| r > 0.0));
        }
    }

    #[test]
    fn complete_graph_rayleigh_quotients() {
        // every unit vector orthogonal to 1 has Rayleigh quotient n on K_n;
        // the Krylov sequence breaks down after one step and restarts
        let cfg = KrylovConfig { order: 4, operator: KrylovOperator::Adjacency };
        let e = build_embedder(&complete(10), &cfg, 1).unwrap();
        assert_eq!(e.dim(), 4);
        for &r in e.rayleigh() {
            assert!((r - 10.0).abs() < 1e-9, "{r}");
        }
    }

    #[test]
    fn two_node_graph_is_exact() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let e = build_embedder(&g, &KrylovConfig::with_order(2), 0).unwrap();
        assert!((estimate_resistance(&e, &g, 0, 1).unwrap() - 1.0).abs() < 1e-6);
        let g = WeightedGraph::from_edges(2, [(0, 1, 4.0)]).unwrap();
        let e = build_embedder(&g, &KrylovConfig::with_order(2), 0).unwrap();
        assert!((e.estimate(1, 0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn symmetric_estimates() {
        let g = path(30);
        let e = build_embedder(&g, &KrylovConfig::with_order(6), 2).unwrap();
        for p in 0..30 {
            for q in 0..30 {
                if p != q {
                    assert_eq!(e.resistance(p, q), e.resistance(q, p));
                    assert!(e.resistance(p, q) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn estimate_errors() {
        let g = path(5);
        let e = build_embedder(&g, &KrylovConfig::with_order(3), 0).unwrap();
        assert!(matches!(e.estimate(2, 2), Err(Error::SameNode(2))));
        assert!(e.estimate(0, 9).is_err());
        assert!(matches!(
            estimate_resistance(&e, &path(6), 0, 1),
            Err(Error::EmbedderMismatch { .. })
        ));
        assert!(build_embedder(&g, &KrylovConfig::with_order(1), 0).is_err());
    }

    #[test]
    fn exact_hand_values() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!((exact_resistance(&g, 0, 2).unwrap() - 2.0).abs() < 1e-12);
        let tri = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        for (p, q) in [(0, 1), (1, 2), (0, 2)] {
            assert!((exact_resistance(&tri, p, q).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        }
        let two = WeightedGraph::from_edges(2, [(0, 1, 4.0)]).unwrap();
        assert!((exact_resistance(&two, 0, 1).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(exact_resistance(&two, 1, 1), Err(Error::SameNode(1))));
    }

    #[test]
    fn exact_too_large() {
        let g = path(20);
        assert!(matches!(
            ExactResistance::with_cap(&g, 10),
            Err(Error::TooLarge { n: 20, cap: 10 })
        ));
    }
}
