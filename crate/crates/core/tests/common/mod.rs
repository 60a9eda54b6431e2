#![allow(dead_code)]

use ingrass::WeightedGraph;
use proptest::prelude::*;

/// Connected weighted graph: random recursive tree plus extra pairs.
pub fn connected_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (3..=max_n).prop_flat_map(|n| {
        let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
        let tree_w = proptest::collection::vec(0.1f64..10.0, n - 1);
        let extra = proptest::collection::vec((0..n, 0..n, 0.1f64..10.0), 0..2 * n);
        (Just(n), parents, tree_w, extra).prop_map(|(n, parents, tree_w, extra)| {
            let mut e: Vec<(usize, usize, f64)> =
                parents.iter().enumerate().map(|(i, &p)| (p, i + 1, tree_w[i])).collect();
            e.extend(extra.into_iter().filter(|&(a, b, _)| a != b));
            WeightedGraph::from_edges(n, e).unwrap()
        })
    })
}

/// Quadratic form summed edge by edge.
pub fn edge_energy(g: &WeightedGraph, x: &[f64]) -> f64 {
    g.edges().iter().map(|e| e.w * (x[e.u] - x[e.v]).powi(2)).sum()
}

/// Resistance by a CG solve of `L x = e_p - e_q`.
pub fn cg_resistance(g: &WeightedGraph, p: usize, q: usize) -> f64 {
    let s = ingrass::cg::LaplacianSolver::new(g, ingrass::cg::Preconditioner::Jacobi, 1e-13).unwrap();
    let mut b = vec![0.0; g.n_nodes()];
    b[p] = 1.0;
    b[q] = -1.0;
    let (x, _) = s.solve(&b).unwrap();
    x[p] - x[q]
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
