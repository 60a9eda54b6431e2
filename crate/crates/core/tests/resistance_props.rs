mod common;

use common::{cg_resistance, connected_graph, rel_close};
use ingrass::resistance::{build_embedder, ExactResistance, KrylovConfig, ResistanceEstimator};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_matches_linear_solve(g in connected_graph(25), a in any::<usize>(), b in any::<usize>()) {
        let n = g.n_nodes();
        let (p, q) = (a % n, b % n);
        prop_assume!(p != q);
        let ex = ExactResistance::new(&g).unwrap();
        prop_assert!(rel_close(ex.get(p, q).unwrap(), cg_resistance(&g, p, q), 1e-8));
    }

    #[test]
    fn exact_is_a_metric(g in connected_graph(18)) {
        let n = g.n_nodes();
        let ex = ExactResistance::new(&g).unwrap();
        let r = |p: usize, q: usize| if p == q { 0.0 } else { ex.get(p, q).unwrap() };
        for p in 0..n {
            for q in 0..n {
                prop_assert!((r(p, q) - r(q, p)).abs() < 1e-10);
                if p != q {
                    prop_assert!(r(p, q) > 0.0);
                }
                for s in 0..n {
                    prop_assert!(r(p, q) <= r(p, s) + r(s, q) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn edge_resistance_at_most_its_own(g in connected_graph(25)) {
        let ex = ExactResistance::new(&g).unwrap();
        for e in g.edges() {
            let r = ex.get(e.u, e.v).unwrap();
            prop_assert!(r <= 1.0 / e.w + 1e-10);
            prop_assert!(e.w * r <= 1.0 + 1e-10);
        }
        // Foster: sum of w * R over edges is n - 1
        let total: f64 = g.edges().iter().map(|e| e.w * ex.get(e.u, e.v).unwrap()).sum();
        prop_assert!((total - (g.n_nodes() - 1) as f64).abs() < 1e-8);
    }

    #[test]
    fn adding_an_edge_never_raises_resistance(g in connected_graph(20), a in any::<usize>(), b in any::<usize>(), w in 0.1f64..5.0) {
        let n = g.n_nodes();
        let (p, q) = (a % n, b % n);
        prop_assume!(p != q);
        let g2 = g.with_added_edges([(p, q, w)]).unwrap();
        let (e1, e2) = (ExactResistance::new(&g).unwrap(), ExactResistance::new(&g2).unwrap());
        for e in g.edges() {
            prop_assert!(e2.get(e.u, e.v).unwrap() <= e1.get(e.u, e.v).unwrap() + 1e-10);
        }
    }

    #[test]
    fn krylov_estimates_are_finite_symmetric(g in connected_graph(40), seed in any::<u64>()) {
        let emb = build_embedder(&g, &KrylovConfig::with_order(6), seed).unwrap();
        for e in g.edges() {
            let r = emb.resistance(e.u, e.v);
            prop_assert!(r.is_finite() && r >= 0.0);
            prop_assert_eq!(r, emb.resistance(e.v, e.u));
        }
        let again = build_embedder(&g, &KrylovConfig::with_order(6), seed).unwrap();
        prop_assert_eq!(emb, again);
    }
}

#[test]
fn hand_values() {
    let path = ingrass::gen::path(7);
    assert!((ingrass::resistance::exact_resistance(&path, 0, 6).unwrap() - 6.0).abs() < 1e-10);
    let tri = ingrass::gen::cycle(3);
    assert!((ingrass::resistance::exact_resistance(&tri, 0, 2).unwrap() - 2.0 / 3.0).abs() < 1e-12);
}
