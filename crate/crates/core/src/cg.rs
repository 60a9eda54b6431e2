//! Preconditioned conjugate gradients for connected graph Laplacians.
//!
//! Systems are solved on the complement of the constant vector: the right
//! hand side is centered and the returned solution has zero mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LaplacianOperator, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    /// Inverse weighted degrees.
    Jacobi,
    /// Exact solve on a maximum-weight spanning tree.
    SpanningTree,
    /// Spanning tree when the graph has at most `AUTO_TREE_EXTRA * n`
    /// edges beyond a tree, Jacobi otherwise.
    #[default]
    Auto,
}

pub const AUTO_TREE_EXTRA: f64 = 0.5;

fn center(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Spanning tree stored as a parent array in BFS order from node 0.
#[derive(Debug, Clone)]
struct TreeSolver {
    order: Vec<u32>,
    parent: Vec<u32>,
    /// Weight of the edge to the parent (unused at the root).
    weight: Vec<f64>,
}

impl TreeSolver {
    fn new(g: &WeightedGraph) -> Self {
        let n = g.n_nodes();
        let tree = crate::baseline::max_spanning_tree(g);
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for e in tree.iter().map(|&id| g.edge(id)) {
            adj[e.u].push((e.v as u32, e.w));
            adj[e.v].push((e.u as u32, e.w));
        }
        let mut parent = vec![u32::MAX; n];
        let mut weight = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        parent[0] = 0;
        order.push(0u32);
        let mut head = 0;
        while head < order.len() {
            let u = order[head] as usize;
            head += 1;
            for &(t, w) in &adj[u] {
                if parent[t as usize] == u32::MAX {
                    parent[t as usize] = u as u32;
                    weight[t as usize] = w;
                    order.push(t);
                }
            }
        }
        TreeSolver {
            order,
            parent,
            weight,
        }
    }

    /// `z = L_T^+ r` for centered `r`; any residual mean is absorbed at
    /// the root.
    fn apply(&self, r: &[f64], z: &mut [f64], flow: &mut [f64]) {
        flow.copy_from_slice(r);
        for &c in self.order[1..].iter().rev() {
            let c = c as usize;
            let p = self.parent[c] as usize;
            flow[p] += flow[c];
        }
        z[0] = 0.0;
        for &c in &self.order[1..] {
            let c = c as usize;
            z[c] = z[self.parent[c] as usize] + flow[c] / self.weight[c];
        }
        center(z);
    }
}

#[derive(Debug, Clone)]
enum Precond {
    Jacobi(Vec<f64>),
    Tree(TreeSolver),
}

/// Reusable solver for `L x = b` on one graph.
#[derive(Debug, Clone)]
pub struct LaplacianSolver<'a> {
    op: LaplacianOperator<'a>,
    precond: Precond,
    pub tol: f64,
    pub max_iter: usize,
}

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl<'a> LaplacianSolver<'a> {
    pub fn new(g: &'a WeightedGraph, precond: Preconditioner, tol: f64) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        let precond = match precond {
            Preconditioner::Auto if crate::eval::extra_density(g) <= AUTO_TREE_EXTRA => {
                Precond::Tree(TreeSolver::new(g))
            }
            Preconditioner::Jacobi | Preconditioner::Auto => {
                Precond::Jacobi(g.weighted_degrees().iter().map(|d| d.recip()).collect())
            }
            Preconditioner::SpanningTree => Precond::Tree(TreeSolver::new(g)),
        };
        Ok(LaplacianSolver {
            op: g.laplacian(),
            precond,
            tol,
            max_iter: (20 * g.n_nodes()).max(1000),
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Solves `L x = b - mean(b)`; `x` is the starting guess and receives
    /// the zero-mean solution.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
        let n = self.dim();
        if b.len() != n || x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len().min(x.len()),
            });
        }
        let mut rhs = b.to_vec();
        center(&mut rhs);
        let bnorm = dot(&rhs, &rhs).sqrt();
        if bnorm == 0.0 {
            x.fill(0.0);
            return Ok(SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        center(x);
        let mut r = vec![0.0; n];
        self.op.apply_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&rhs) {
            *ri = bi - *ri;
        }
        let mut z = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        self.precondition(&r, &mut z, &mut scratch);
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut res = dot(&r, &r).sqrt() / bnorm;
        let mut it = 0;
        while res > self.tol {
            if it >= self.max_iter {
                return Err(Error::SolverFailure(format!(
                    "pcg stalled at relative residual {res:.3e} after {it} iterations"
                )));
            }
            self.op.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::SolverFailure(format!(
                    "non-positive curvature {pap:e} in pcg"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            self.precondition(&r, &mut z, &mut scratch);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            res = dot(&r, &r).sqrt() / bnorm;
            it += 1;
        }
        center(x);
        Ok(SolveStats {
            iterations: it,
            relative_residual: res,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let mut x = vec![0.0; self.dim()];
        let stats = self.solve_into(b, &mut x)?;
        Ok((x, stats))
    }

    fn precondition(&self, r: &[f64], z: &mut [f64], scratch: &mut [f64]) {
        match &self.precond {
            Precond::Jacobi(inv) => {
                for i in 0..r.len() {
                    z[i] = r[i] * inv[i];
                }
            }
            Precond::Tree(t) => t.apply(r, z, scratch),
        }
    }
}
