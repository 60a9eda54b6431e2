//! Spectral similarity between a graph and its sparsifier.
//!
//! `kappa = lambda_max / lambda_min` for the pencil `L_G x = lambda L_H x`
//! on the complement of the constant vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cg::{LaplacianSolver, Preconditioner};
use crate::dense::{
    check_cap, generalized_symmetric_eigenvalues, grounded_laplacian, LaplacianSpectrum,
    DEFAULT_DENSE_CAP,
};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub kappa: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// `|E_H| / |V|`.
    pub density_h: f64,
    /// `|E_G| / |V|`.
    pub density_g: f64,
    /// Lanczos steps summed over both extremes (0 for the dense path).
    pub iterations: usize,
    pub method: Method,
    pub converged: bool,
}

/// Edges per node.
pub fn density(g: &WeightedGraph) -> f64 {
    g.n_edges() as f64 / g.n_nodes() as f64
}

/// Edges beyond a spanning tree, per node.
pub fn extra_density(g: &WeightedGraph) -> f64 {
    (g.n_edges() as f64 - (g.n_nodes() as f64 - 1.0)) / g.n_nodes() as f64
}

fn check_pair(g: &WeightedGraph, h: &WeightedGraph) -> Result<()> {
    if g.n_nodes() != h.n_nodes() {
        return Err(Error::NodeSetMismatch(g.n_nodes(), h.n_nodes()));
    }
    if g.n_nodes() < 2 {
        return Err(Error::InvalidArgument("pencil needs at least 2 nodes".into()));
    }
    if !g.is_connected() || !h.is_connected() {
        return Err(Error::NotConnected);
    }
    Ok(())
}

/// Dense generalized eigensolve on grounded Laplacians.
pub fn condition_number_exact(g: &WeightedGraph, h: &WeightedGraph) -> Result<SimilarityReport> {
    condition_number_exact_with_cap(g, h, DEFAULT_DENSE_CAP)
}

pub fn condition_number_exact_with_cap(
    g: &WeightedGraph,
    h: &WeightedGraph,
    cap: usize,
) -> Result<SimilarityReport> {
    if g.n_nodes() != h.n_nodes() {
        return Err(Error::NodeSetMismatch(g.n_nodes(), h.n_nodes()));
    }
    check_cap(g.n_nodes(), cap)?;
    check_pair(g, h)?;
    let vals = generalized_symmetric_eigenvalues(&grounded_laplacian(g), &grounded_laplacian(h))?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    Ok(SimilarityReport {
        kappa: hi / lo,
        lambda_max: hi,
        lambda_min: lo,
        density_h: density(h),
        density_g: density(g),
        iterations: 0,
        method: Method::Exact,
        converged: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterativeConfig {
    /// Relative accuracy requested for each extreme eigenvalue.
    pub tol: f64,
    /// Lanczos steps per extreme eigenvalue.
    pub max_iter: usize,
    /// Relative residual of the inner Laplacian solves.
    pub solve_tol: f64,
    pub preconditioner: Preconditioner,
    pub seed: u64,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        IterativeConfig {
            tol: 1e-3,
            max_iter: 300,
            solve_tol: 1e-8,
            preconditioner: Preconditioner::Auto,
            seed: 0,
        }
    }
}

struct TopEig {
    value: f64,
    steps: usize,
    converged: bool,
}

fn center(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of `L_B^+ L_A` by Lanczos in the `L_B` inner product
/// with full reorthogonalization. Stops once the Ritz residual
/// `|beta_k s_k|` falls below `tol * theta`.
fn top_pencil_eigenvalue(
    a: &WeightedGraph,
    b: &WeightedGraph,
    cfg: &IterativeConfig,
    seed: u64,
) -> Result<TopEig> {
    let n = a.n_nodes();
    let la = a.laplacian();
    let lb = b.laplacian();
    let solver = LaplacianSolver::new(b, cfg.preconditioner, cfg.solve_tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    center(&mut v);
    let mut bv = lb.apply(&v)?;
    let nrm = dot(&v, &bv).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    bv.iter_mut().for_each(|x| *x /= nrm);

    let steps = cfg.max_iter.clamp(1, n - 1);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut bbasis: Vec<Vec<f64>> = vec![bv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut av = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut best = 0.0;

    for k in 0..steps {
        la.apply_into(&basis[k], &mut av);
        alpha.push(dot(&basis[k], &av));
        solver.solve_into(&av, &mut w)?;
        for _ in 0..2 {
            for (q, bq) in basis.iter().zip(&bbasis) {
                let c = dot(bq, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bw = lb.apply(&w)?;
        let bnext = dot(&w, &bw).max(0.0).sqrt();

        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        best = theta;
        let resid = (bnext * eig.eigenvectors[(m - 1, imax)]).abs();
        if resid <= cfg.tol * theta.abs() || bnext <= 1e-14 * theta.abs() {
            return Ok(TopEig {
                value: theta,
                steps: k + 1,
                converged: true,
            });
        }
        beta.push(bnext);
        let q: Vec<f64> = w.iter().map(|x| x / bnext).collect();
        let bq: Vec<f64> = bw.iter().map(|x| x / bnext).collect();
        basis.push(q);
        bbasis.push(bq);
        w.fill(0.0);
    }
    Ok(TopEig {
        value: best,
        steps,
        converged: steps == n - 1,
    })
}

/// Extreme pencil eigenvalues by Lanczos: `lambda_max` on `(L_G, L_H)` and
/// `lambda_min` as the reciprocal of the top eigenvalue of `(L_H, L_G)`.
///
/// Returns [`Error::NoConvergence`] carrying the best estimate when either
/// run exhausts `max_iter`.
pub fn condition_number_iterative(
    g: &WeightedGraph,
    h: &WeightedGraph,
    cfg: &IterativeConfig,
) -> Result<SimilarityReport> {
    check_pair(g, h)?;
    let hi = top_pencil_eigenvalue(g, h, cfg, cfg.seed)?;
    let lo = top_pencil_eigenvalue(h, g, cfg, cfg.seed.wrapping_add(1))?;
    let lambda_min = lo.value.recip();
    let report = SimilarityReport {
        kappa: hi.value / lambda_min,
        lambda_max: hi.value,
        lambda_min,
        density_h: density(h),
        density_g: density(g),
        iterations: hi.steps + lo.steps,
        method: Method::Iterative,
        converged: hi.converged && lo.converged,
    };
    if !report.converged {
        return Err(Error::NoConvergence(Box::new(report)));
    }
    Ok(report)
}

/// Either path, chosen by size: dense up to `DEFAULT_DENSE_CAP` nodes.
pub fn condition_number(
    g: &WeightedGraph,
    h: &WeightedGraph,
    cfg: &IterativeConfig,
) -> Result<SimilarityReport> {
    if g.n_nodes() <= DEFAULT_DENSE_CAP / 4 {
        condition_number_exact(g, h)
    } else {
        condition_number_iterative(g, h, cfg)
    }
}

/// Truncated spectral distortion `w * ||U_K^T b_uv||^2`, where `U_K` holds
/// the eigenvectors 2..K scaled by `1/sqrt(lambda_i)`.
pub struct DistortionOracle {
    spectrum: LaplacianSpectrum,
}

impl DistortionOracle {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Self::with_cap(g, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(g: &WeightedGraph, cap: usize) -> Result<Self> {
        Ok(DistortionOracle {
            spectrum: LaplacianSpectrum::new(g, cap)?,
        })
    }

    pub fn distortion(&self, u: usize, v: usize, w: f64, k: usize) -> Result<f64> {
        let n = self.spectrum.n();
        if k < 2 || k > n {
            return Err(Error::BadK { k, n });
        }
        for x in [u, v] {
            if x >= n {
                return Err(Error::OutOfRange { node: x, n });
            }
        }
        if u == v {
            return Err(Error::SameNode(u));
        }
        Ok(w * (1..k).map(|i| self.spectrum.term(i, u, v)).sum::<f64>())
    }
}

pub fn exact_distortion(g: &WeightedGraph, u: usize, v: usize, w: f64, k: usize) -> Result<f64> {
    DistortionOracle::new(g)?.distortion(u, v, w, k)
}
