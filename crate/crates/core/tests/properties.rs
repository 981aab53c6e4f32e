mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use pseudocut::approx::{fen_detailed, gen};
use pseudocut::baseline::{
    cumulative_per, min_vertex_cut, per_threshold, per_to_length, transform_per_graph,
};
use pseudocut::exact::{exact_small_t, hopcroft_karp, konig_cover, opt, opt_hitting_set};
use pseudocut::generators::{
    degree_classes, gen_er, gen_targets, SchemeKind, TargetScheme, WeightMode,
};
use pseudocut::gest::{gest, GestConfig};
use pseudocut::{
    count_paths_through, enumerate_paths, sample_path, CoveringInstance, ElementMode, Limits,
    PseudocutInstance,
};
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn distance_grows_under_removal(seed in any::<u64>(), edge_mode in any::<bool>()) {
        let mut r = rng(seed);
        let g = { let directed = r.gen_bool(0.5); random_graph(&mut r, 9, 0.3, directed, 5) };
        let mode = if edge_mode { ElementMode::Edge } else { ElementMode::Vertex };
        let count = g.element_count(mode);
        let small: Vec<usize> = (0..count).filter(|_| r.gen_bool(0.2)).collect();
        let mut big = small.clone();
        big.extend((0..count).filter(|_| r.gen_bool(0.2)));
        big.sort_unstable();
        big.dedup();
        for u in 0..9 {
            for v in 0..9 {
                let a = g.shortest_distance(u, v, &small, mode).unwrap();
                let b = g.shortest_distance(u, v, &big, mode).unwrap();
                prop_assert!(a <= b);
            }
        }
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = { let directed = r.gen_bool(0.5); random_graph(&mut r, 8, 0.35, directed, 6) };
        let removed: Vec<usize> = (0..8).filter(|_| r.gen_bool(0.15)).collect();
        let d = |u, v| g.shortest_distance(u, v, &removed, ElementMode::Vertex).unwrap();
        for u in 0..8 {
            for v in 0..8 {
                for w in 0..8 {
                    prop_assert!(d(u, w) <= d(u, v) + d(v, w) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn feasible_iff_every_short_path_is_hit(seed in any::<u64>(), edge_mode in any::<bool>()) {
        let mode = if edge_mode { ElementMode::Edge } else { ElementMode::Vertex };
        let inst = random_multi(seed, 7, 0.3, 2, mode, 4.0);
        let cov = enumerate_paths(&inst, &Limits::default()).unwrap();
        let cand = inst.removable_elements();
        let mut r = rng(seed ^ 1);
        for _ in 0..64 {
            let w: Vec<usize> = cand.iter().copied().filter(|_| r.gen_bool(0.3)).collect();
            prop_assert_eq!(inst.is_feasible(&w).unwrap(), cov.is_hit_by(&w));
        }
    }

    #[test]
    fn removing_everything_separates_valid_instances(seed in any::<u64>()) {
        let inst = random_multi(seed, 8, 0.3, 3, ElementMode::Vertex, 5.0);
        prop_assert!(inst.is_feasible(&inst.removable_elements()).unwrap());
    }

    #[test]
    fn enumeration_matches_sequence_filter(seed in any::<u64>(), hops in 2u32..5) {
        let mut r = rng(seed);
        let g = { let directed = r.gen_bool(0.5); random_graph(&mut r, 7, 0.35, directed, 3) };
        let q = g.min_length().unwrap_or(1.0);
        let inst = PseudocutInstance::new(Arc::new(g), hops as f64 * q + 0.5, vec![(0, 6), (3, 1)], ElementMode::Vertex).unwrap();
        let cov = enumerate_paths(&inst, &Limits::default()).unwrap();
        let got: BTreeSet<(usize, Vec<usize>)> = cov.paths().iter().map(|p| (p.pair, p.vertices.clone())).collect();
        prop_assert_eq!(got.len(), cov.len());
        prop_assert_eq!(got, naive_vertex_paths(&inst));
        prop_assert!(cov.paths().iter().all(|p| p.length <= inst.threshold() && p.edges.len() <= inst.hop_bound()));
    }

    #[test]
    fn sampling_distribution_sums_to_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = { let directed = r.gen_bool(0.5); random_graph(&mut r, 8, 0.35, directed, 3) };
        let inst = PseudocutInstance::single(Arc::new(g), 6.0, 0, 7).unwrap();
        let (total, hits) = walk_tree(inst.graph(), 0, 7, 6.0);
        prop_assert!((total - 1.0).abs() < 1e-12);
        let expected: BTreeSet<Vec<usize>> = enumerate_paths(&inst, &Limits::default())
            .unwrap()
            .paths()
            .iter()
            .map(|p| p.vertices.clone())
            .collect();
        let reached: BTreeSet<Vec<usize>> = hits.iter().map(|(p, _)| p.clone()).collect();
        prop_assert_eq!(reached, expected);
        prop_assert!(hits.iter().all(|(_, h)| *h > 0.0));
        // The sampler reports exactly the tree probability of what it drew.
        for _ in 0..20 {
            let q = sample_path(inst.graph(), 0, 7, 6.0, ElementMode::Vertex, &[false; 8], &mut r);
            if q.hit {
                let h = hits.iter().find(|(p, _)| *p == q.vertices).unwrap().1;
                prop_assert!((q.probability - h).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn solvers_agree_with_brute_force(seed in any::<u64>()) {
        let inst = random_single(seed, 9, 0.3, 3, 4.0, true);
        let (best, _) = brute_opt(&inst);
        let limits = Limits::default();
        let o = opt(&inst, &limits).unwrap();
        prop_assert!((o.cost - best).abs() < 1e-9);
        prop_assert!(o.feasible);

        let cov = enumerate_paths(&inst, &limits).unwrap();
        let g = gen(&inst, &limits).unwrap();
        prop_assert!(g.feasible);
        let p = cov.len() as f64;
        prop_assert!(g.cost <= (1.0 + p.ln()) * best + 1e-9);

        let (f, lp) = fen_detailed(&inst, &limits).unwrap();
        prop_assert!(f.feasible);
        prop_assert!(lp.objective <= best + 1e-6);
        prop_assert!(f.cost <= (inst.hop_bound() as f64 + 1.0) * lp.objective + 1e-6);
        prop_assert!(lp.objective <= g.cost + 1e-6);

        let s = gest(&inst, &GestConfig { seed, ..GestConfig::default() }, &limits).unwrap();
        prop_assert!(s.feasible);
        prop_assert!(lp.objective <= s.cost + 1e-6);
    }

    #[test]
    fn multi_pair_solvers_feasible(seed in any::<u64>(), edge_mode in any::<bool>()) {
        let mode = if edge_mode { ElementMode::Edge } else { ElementMode::Vertex };
        let inst = random_multi(seed, 7, 0.3, 3, mode, 4.0);
        let limits = Limits::default();
        let (best, _) = brute_opt(&inst);
        prop_assert!((opt(&inst, &limits).unwrap().cost - best).abs() < 1e-9);
        prop_assert!(gen(&inst, &limits).unwrap().feasible);
        prop_assert!(fen_detailed(&inst, &limits).unwrap().0.feasible);
        let s = gest(&inst, &GestConfig { seed, ..GestConfig::default() }, &limits).unwrap();
        prop_assert!(s.feasible);
        prop_assert!(s.elements.iter().all(|&e| inst.is_removable(e)));
    }

    #[test]
    fn branch_and_bound_matches_subset_search(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = 12;
        let costs: Vec<f64> = (0..m).map(|_| r.gen_range(1..=5) as f64).collect();
        let sets: Vec<Vec<usize>> = (0..r.gen_range(1..15))
            .map(|_| (0..r.gen_range(1..5)).map(|_| r.gen_range(0..m)).collect())
            .collect();
        let cov = CoveringInstance::from_sets(costs.clone(), sets, 4).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0u32..1 << m {
            let w: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            if cov.is_hit_by(&w) {
                best = best.min(w.iter().map(|&e| costs[e]).sum());
            }
        }
        let got = opt_hitting_set(&cov, None, &Limits::default()).unwrap().unwrap();
        prop_assert!((got.cost - best).abs() < 1e-9);
    }

    #[test]
    fn small_threshold_solvers_are_optimal(seed in any::<u64>(), hops in 1u32..4) {
        let mut r = rng(seed);
        let n = r.gen_range(4..12);
        let mut g = pseudocut::Graph::new(n, r.gen_bool(0.5));
        for u in 0..n {
            for v in 0..n {
                if u != v && (g.is_directed() || u < v) && r.gen_bool(0.3) && !(u.min(v) == 0 && u.max(v) == n - 1) {
                    g.add_edge(u, v, 1.0).unwrap();
                }
            }
        }
        let inst = PseudocutInstance::single(Arc::new(g), hops as f64, 0, n - 1).unwrap();
        let sol = exact_small_t(&inst).unwrap();
        prop_assert!(sol.feasible);
        prop_assert_eq!(sol.cost, brute_opt(&inst).0);
    }

    #[test]
    fn konig_cover_size_equals_matching(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nl, nr) = (r.gen_range(1..9), r.gen_range(1..9));
        let adj: Vec<Vec<usize>> = (0..nl)
            .map(|_| (0..nr).filter(|_| r.gen_bool(0.3)).collect())
            .collect();
        let m = hopcroft_karp(nr, &adj);
        let (l, rr) = konig_cover(&adj, &m);
        prop_assert_eq!(l.len() + rr.len(), m.size);
        for (u, row) in adj.iter().enumerate() {
            for v in row {
                prop_assert!(l.contains(&u) || rr.contains(v));
            }
        }
    }

    #[test]
    fn vertex_cut_matches_exhaustive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = { let directed = r.gen_bool(0.5); random_graph(&mut r, 9, 0.3, directed, 2) };
        if r.gen_bool(0.5) {
            mixed_costs(&mut r, &mut g);
        }
        if g.out_arcs(0).iter().any(|a| a.head == 8) {
            prop_assert!(min_vertex_cut(&g, 0, 8).is_err());
        } else {
            let cut = min_vertex_cut(&g, 0, 8).unwrap();
            prop_assert_eq!(cut.value, brute_vertex_cut(&g, 0, 8));
            prop_assert!(g.shortest_distance(0, 8, &cut.vertices, ElementMode::Vertex).unwrap().is_infinite());
        }
    }

    #[test]
    fn cut_is_independent_of_threshold_while_optimum_grows(seed in any::<u64>()) {
        let inst = random_single(seed, 9, 0.3, 2, 2.0, false);
        let limits = Limits::default();
        let mut last = 0.0;
        let mc0 = pseudocut::mc(&inst).map(|s| s.cost).ok();
        for t in [2.0, 3.0, 4.0, 6.0, 10.0, 20.0] {
            let i = inst.with_threshold(t);
            prop_assert_eq!(pseudocut::mc(&i).map(|s| s.cost).ok(), mc0);
            let c = opt(&i, &limits).unwrap().cost;
            prop_assert!(c >= last);
            if let Some(m) = mc0 {
                prop_assert!(c <= m);
            }
            last = c;
        }
        // Beyond the longest simple path every route must be cut.
        if let Some(m) = mc0 {
            prop_assert_eq!(opt(&inst.with_threshold(100.0), &limits).unwrap().cost, m);
        }
    }

    #[test]
    fn per_transform_is_monotone_and_matches_products(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 6;
        let mut g = pseudocut::Graph::new(n, r.gen_bool(0.5));
        for u in 0..n {
            for v in 0..n {
                if u != v && r.gen_bool(0.35) {
                    g.add_edge(u, v, r.gen_range(0.001..0.6)).unwrap();
                }
            }
        }
        let h = transform_per_graph(&g).unwrap();
        let paths = all_simple_paths(&g, 0, n - 1);
        let best = paths
            .iter()
            .map(|edges| edges.iter().map(|&e| 1.0 - g.length(e)).product::<f64>())
            .fold(0.0, f64::max);
        let got = cumulative_per(&g, 0, n - 1).unwrap();
        prop_assert!((got - (1.0 - best)).abs() < 1e-12);
        let d = h.shortest_distance(0, n - 1, &[], ElementMode::Vertex).unwrap();
        for _ in 0..20 {
            let p: f64 = r.gen_range(0.0001..0.9999);
            prop_assert_eq!(d < per_threshold(p).unwrap(), got < p);
        }
        let a: f64 = r.gen_range(0.001..0.5);
        prop_assert!(per_to_length(a).unwrap() < per_to_length(a + 0.1).unwrap());
    }

    #[test]
    fn target_draws_are_distinct_and_in_class(seed in any::<u64>(), scheme in 0usize..4, zeta in 0.2f64..0.8) {
        let kind = [SchemeKind::RR, SchemeKind::HH, SchemeKind::HL, SchemeKind::LL][scheme];
        let g = gen_er(40, 80, WeightMode::Unit, seed).unwrap();
        let (high, low) = degree_classes(&g, zeta);
        let ts = TargetScheme { kind, zeta, k: 4, seed };
        match gen_targets(&g, &ts) {
            Ok(pairs) => {
                prop_assert_eq!(pairs.len(), 4);
                prop_assert_eq!(pairs.iter().collect::<BTreeSet<_>>().len(), 4);
                for (s, t) in pairs {
                    prop_assert!(s != t);
                    let (a, b) = match kind {
                        SchemeKind::RR => (true, true),
                        SchemeKind::HH => (high.contains(&s), high.contains(&t)),
                        SchemeKind::HL => (high.contains(&s), low.contains(&t)),
                        SchemeKind::LL => (low.contains(&s), low.contains(&t)),
                    };
                    prop_assert!(a && b);
                }
                prop_assert_eq!(gen_targets(&g, &ts).unwrap(), gen_targets(&g, &ts).unwrap());
            }
            Err(_) => prop_assert!(kind != SchemeKind::RR),
        }
    }
}

#[test]
fn estimator_counts_paths_through_on_fig1() {
    use pseudocut::gest::sigma;
    let (_, inst) = pseudocut::generators::gen_fig1();
    let cov = enumerate_paths(&inst, &Limits::default()).unwrap();
    assert_eq!(count_paths_through(&cov, &[6]), 3);
    let mut r = rng(77);
    let samples: Vec<_> = (0..100_000)
        .map(|_| {
            sample_path(
                inst.graph(),
                0,
                12,
                5.0,
                ElementMode::Vertex,
                &[false; 13],
                &mut r,
            )
        })
        .collect();
    let est = sigma(&samples, &[6], ElementMode::Vertex);
    let vals: Vec<f64> = samples
        .iter()
        .map(|q| {
            if q.hit && q.vertices.contains(&6) {
                q.inv_probability
            } else {
                0.0
            }
        })
        .collect();
    let var = vals.iter().map(|v| (v - est).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
    let se = (var / vals.len() as f64).sqrt();
    assert!((est - 3.0).abs() <= 3.0 * se, "estimate {est}, se {se}");
}
