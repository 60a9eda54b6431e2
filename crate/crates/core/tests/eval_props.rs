mod common;

use common::{cg_resistance, connected_graph, edge_energy, rel_close};
use ingrass::baseline::max_spanning_tree;
use ingrass::eval::{
    condition_number_exact, condition_number_iterative, exact_distortion, IterativeConfig,
};
use ingrass::WeightedGraph;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Graph plus a connected subgraph: spanning tree and a random subset of
/// the remaining edges, each optionally rescaled.
fn graph_and_subgraph(max_n: usize) -> impl Strategy<Value = (WeightedGraph, WeightedGraph, bool)> {
    (connected_graph(max_n), any::<u64>(), any::<bool>()).prop_map(|(g, bits, rescale)| {
        let tree = max_spanning_tree(&g);
        let mut keep = vec![false; g.n_edges()];
        tree.iter().for_each(|&i| keep[i] = true);
        let edges = g.edges().iter().enumerate().filter_map(|(i, e)| {
            let on = keep[i] || (bits >> (i % 64)) & 1 == 1;
            let scale = if rescale { 0.5 + ((i * 7) % 5) as f64 / 2.0 } else { 1.0 };
            on.then_some((e.u, e.v, e.w * scale))
        });
        let h = WeightedGraph::from_edges(g.n_nodes(), edges).unwrap();
        (g, h, rescale)
    })
}

fn full_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
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

/// Pencil eigenvalues through `L_H^{+/2} L_G L_H^{+/2}`, dropping the
/// shared null vector.
fn pencil_by_pseudo_sqrt(g: &WeightedGraph, h: &WeightedGraph) -> (f64, f64) {
    let eh = SymmetricEigen::new(full_laplacian(h));
    let scale = eh.eigenvalues.map(|x| if x > 1e-9 { x.sqrt().recip() } else { 0.0 });
    let s = &eh.eigenvectors * DMatrix::from_diagonal(&scale) * eh.eigenvectors.transpose();
    let m = &s * full_laplacian(g) * &s;
    let mut vals: Vec<f64> = SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    (vals[1], vals[vals.len() - 1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_pseudo_sqrt((g, h, _) in graph_and_subgraph(30)) {
        let r = condition_number_exact(&g, &h).unwrap();
        let (lo, hi) = pencil_by_pseudo_sqrt(&g, &h);
        prop_assert!(rel_close(r.lambda_min, lo, 1e-7), "{} vs {}", r.lambda_min, lo);
        prop_assert!(rel_close(r.lambda_max, hi, 1e-7), "{} vs {}", r.lambda_max, hi);
        prop_assert!(r.kappa >= 1.0 - 1e-12);
    }

    #[test]
    fn rayleigh_quotients_inside_spectrum((g, h, _) in graph_and_subgraph(30), xs in proptest::collection::vec(-1.0f64..1.0, 30 * 8)) {
        let n = g.n_nodes();
        let r = condition_number_exact(&g, &h).unwrap();
        for x in xs.chunks(30).take(8) {
            let x = &x[..n];
            let q = edge_energy(&g, x) / edge_energy(&h, x);
            if q.is_finite() {
                prop_assert!(q <= r.lambda_max * (1.0 + 1e-9));
                prop_assert!(q >= r.lambda_min * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn unscaled_subgraph_has_lambda_min_at_least_one((g, h, rescale) in graph_and_subgraph(30)) {
        prop_assume!(!rescale);
        let r = condition_number_exact(&g, &h).unwrap();
        prop_assert!(r.lambda_min >= 1.0 - 1e-9);
        if h.n_edges() == g.n_edges() {
            prop_assert!(rel_close(r.kappa, 1.0, 1e-9));
        }
    }

    #[test]
    fn scaled_copy_has_unit_kappa(g in connected_graph(40), c in 0.01f64..100.0) {
        let h = WeightedGraph::from_edges(g.n_nodes(), g.edges().iter().map(|e| (e.u, e.v, c * e.w))).unwrap();
        let r = condition_number_exact(&g, &h).unwrap();
        prop_assert!(rel_close(r.kappa, 1.0, 1e-9));
        prop_assert!(rel_close(r.lambda_max, 1.0 / c, 1e-9));
        let it = condition_number_iterative(&g, &h, &IterativeConfig::default()).unwrap();
        prop_assert!(rel_close(it.kappa, 1.0, 1e-6));
    }

    #[test]
    fn iterative_agrees_with_exact((g, h, _) in graph_and_subgraph(40), seed in any::<u64>()) {
        let cfg = IterativeConfig { tol: 1e-8, max_iter: 400, solve_tol: 1e-11, seed, ..Default::default() };
        let exact = condition_number_exact(&g, &h).unwrap();
        let it = condition_number_iterative(&g, &h, &cfg).unwrap();
        prop_assert!(it.converged);
        prop_assert!(rel_close(it.lambda_max, exact.lambda_max, 1e-5), "{} vs {}", it.lambda_max, exact.lambda_max);
        prop_assert!(rel_close(it.lambda_min, exact.lambda_min, 1e-5), "{} vs {}", it.lambda_min, exact.lambda_min);
    }

    #[test]
    fn distortion_limit_and_monotonicity(g in connected_graph(30), p in 0usize..30, q in 0usize..30, w in 0.1f64..10.0) {
        let n = g.n_nodes();
        let (p, q) = (p % n, q % n);
        prop_assume!(p != q);
        let full = exact_distortion(&g, p, q, w, n).unwrap();
        prop_assert!(rel_close(full, w * cg_resistance(&g, p, q), 1e-8));
        let mut prev = 0.0;
        for k in 2..=n {
            let d = exact_distortion(&g, p, q, w, k).unwrap();
            prop_assert!(d >= prev - 1e-12 * full);
            prev = d;
        }
    }
}

#[test]
fn distortion_rejects_bad_k() {
    let g = ingrass::gen::cycle(6);
    assert!(exact_distortion(&g, 0, 1, 1.0, 1).is_err());
    assert!(exact_distortion(&g, 0, 1, 1.0, 7).is_err());
    assert!(exact_distortion(&g, 2, 2, 1.0, 3).is_err());
}
