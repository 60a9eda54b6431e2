//! Dense linear algebra used by the exact oracles (small graphs only).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Node-count cap for dense oracles.
pub const DEFAULT_DENSE_CAP: usize = 2000;

pub fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    Ok(())
}

pub fn dense_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.n_nodes();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.u)] += e.w;
        l[(e.v, e.v)] += e.w;
        l[(e.u, e.v)] -= e.w;
        l[(e.v, e.u)] -= e.w;
    }
    l
}

/// Laplacian with the last row and column removed. Positive definite for
/// connected graphs, and the pencil of two grounded Laplacians has the same
/// spectrum as the original pencil restricted to the complement of the
/// constant vector.
pub fn grounded_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.n_nodes();
    dense_laplacian(g).view((0, 0), (n - 1, n - 1)).into_owned()
}

/// Full eigendecomposition of a graph Laplacian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl LaplacianSpectrum {
    pub fn new(g: &WeightedGraph, cap: usize) -> Result<Self> {
        check_cap(g.n_nodes(), cap)?;
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        let eig = SymmetricEigen::new(dense_laplacian(g));
        let n = g.n_nodes();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(LaplacianSpectrum { values, vectors })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `(u_i^T b_pq)^2 / lambda_i` for eigenpair `i`.
    pub fn term(&self, i: usize, p: usize, q: usize) -> f64 {
        let d = self.vectors[(p, i)] - self.vectors[(q, i)];
        d * d / self.values[i]
    }
}

/// Symmetric generalized eigenvalues of `(a, b)` with `b` positive
/// definite, via Cholesky reduction. Ascending.
pub fn generalized_symmetric_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("pencil matrix is not positive definite".into()))?;
    let l = chol.l();
    // M = L^{-1} A L^{-T}
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::SolverFailure("singular Cholesky factor".into()))?;
    let m = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::SolverFailure("singular Cholesky factor".into()))?;
    let m = (&m + m.transpose()) * 0.5;
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
