//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use pseudocut::{ElementMode, Graph, PseudocutInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Simple random graph: every ordered (or unordered) pair becomes an edge with
/// probability `p`; integer lengths in `1..=max_len`.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, directed: bool, max_len: u32) -> Graph {
    let mut g = Graph::new(n, directed);
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if r.gen_bool(p) {
                g.add_edge(u, v, r.gen_range(1..=max_len) as f64).unwrap();
            }
        }
    }
    g
}

pub fn mixed_costs(r: &mut ChaCha8Rng, g: &mut Graph) {
    for v in 0..g.vertex_count() {
        g.set_vertex_cost(v, r.gen_range(1..=4) as f64).unwrap();
    }
    for e in 0..g.edge_count() {
        g.set_edge_cost(e, r.gen_range(1..=4) as f64).unwrap();
    }
}

/// Single-pair vertex instance on a random graph with `s = 0`, `t = n - 1`,
/// retried until the pair is separable and not already separated.
pub fn random_single(
    seed: u64,
    n: usize,
    p: f64,
    max_len: u32,
    t_hops: f64,
    costs: bool,
) -> PseudocutInstance {
    let mut r = rng(seed);
    loop {
        let mut g = {
            let directed = r.gen_bool(0.5);
            random_graph(&mut r, n, p, directed, max_len)
        };
        if costs {
            mixed_costs(&mut r, &mut g);
        }
        let q = g.min_length().unwrap_or(1.0);
        let inst = PseudocutInstance::single(Arc::new(g), t_hops * q, 0, n - 1).unwrap();
        let mask = vec![false; n];
        if inst.validate().is_ok() && !inst.unseparated_pairs(&mask).is_empty() {
            return inst;
        }
    }
}

/// Multi-pair instance in either mode; pair members are removable.
pub fn random_multi(
    seed: u64,
    n: usize,
    p: f64,
    k: usize,
    mode: ElementMode,
    t_hops: f64,
) -> PseudocutInstance {
    let mut r = rng(seed);
    loop {
        let mut g = {
            let directed = r.gen_bool(0.5);
            random_graph(&mut r, n, p, directed, 3)
        };
        mixed_costs(&mut r, &mut g);
        let mut pairs = BTreeSet::new();
        while pairs.len() < k {
            let s = r.gen_range(0..n);
            let t = r.gen_range(0..n);
            if s != t {
                pairs.insert((s, t));
            }
        }
        let q = g.min_length().unwrap_or(1.0);
        let inst =
            PseudocutInstance::new(Arc::new(g), t_hops * q, pairs.into_iter().collect(), mode)
                .unwrap();
        if inst.validate().is_ok() && inst.element_count() <= 14 {
            return inst;
        }
    }
}

/// Minimum cost over every subset of removable elements, judged only by
/// shortest-path feasibility. Returns (cost, set).
pub fn brute_opt(inst: &PseudocutInstance) -> (f64, Vec<usize>) {
    let cand = inst.removable_elements();
    assert!(
        cand.len() <= 16,
        "too many candidates for exhaustive search"
    );
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..1 << cand.len() {
        let w: Vec<usize> = (0..cand.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| cand[i])
            .collect();
        let c = inst.cost_of(&w);
        if c < best.0 && inst.is_feasible(&w).unwrap() {
            best = (c, w);
        }
    }
    best
}

/// Every vertex sequence `s .. t` of at most `hop_bound + 1` distinct vertices
/// joined by arcs, with length at most `T`, as (pair, vertex list).
pub fn naive_vertex_paths(inst: &PseudocutInstance) -> BTreeSet<(usize, Vec<usize>)> {
    let g = inst.graph();
    let n = g.vertex_count();
    let hop = inst.hop_bound();
    let arc_len = |u: usize, v: usize| {
        g.out_arcs(u)
            .iter()
            .filter(|a| a.head == v)
            .map(|a| g.length(a.edge))
            .fold(f64::INFINITY, f64::min)
    };
    let mut out = BTreeSet::new();
    for (pi, &(s, t)) in inst.targets().iter().enumerate() {
        // Odometer over sequences of interior vertices of each length.
        for interior in 0..hop {
            let mut idx = vec![0usize; interior];
            loop {
                let mut seq = vec![s];
                seq.extend(idx.iter().copied());
                seq.push(t);
                let distinct = seq.iter().collect::<BTreeSet<_>>().len() == seq.len();
                if distinct {
                    let len: f64 = seq.windows(2).map(|w| arc_len(w[0], w[1])).sum();
                    if len <= inst.threshold() {
                        out.insert((pi, seq));
                    }
                }
                let mut i = 0;
                while i < interior {
                    idx[i] += 1;
                    if idx[i] < n {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == interior {
                    break;
                }
            }
        }
    }
    out
}

/// Expands every walk the sampler can take from `u`, returning the total
/// probability mass and the hit walks with their probabilities.
pub fn walk_tree(g: &Graph, u: usize, v: usize, threshold: f64) -> (f64, Vec<(Vec<usize>, f64)>) {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &Graph,
        v: usize,
        threshold: f64,
        path: &mut Vec<usize>,
        len: f64,
        prob: f64,
        total: &mut f64,
        hits: &mut Vec<(Vec<usize>, f64)>,
    ) {
        let cur = *path.last().unwrap();
        if cur == v {
            *total += prob;
            hits.push((path.clone(), prob));
            return;
        }
        let mut next: Vec<(usize, f64)> = Vec::new();
        for a in g.out_arcs(cur) {
            if path.contains(&a.head) || len + g.length(a.edge) > threshold {
                continue;
            }
            match next.iter_mut().find(|(h, _)| *h == a.head) {
                Some(entry) => entry.1 = entry.1.min(g.length(a.edge)),
                None => next.push((a.head, g.length(a.edge))),
            }
        }
        if next.is_empty() {
            *total += prob;
            return;
        }
        let share = prob / next.len() as f64;
        for (h, d) in next {
            path.push(h);
            rec(g, v, threshold, path, len + d, share, total, hits);
            path.pop();
        }
    }
    let mut total = 0.0;
    let mut hits = Vec::new();
    rec(
        g,
        v,
        threshold,
        &mut vec![u],
        0.0,
        1.0,
        &mut total,
        &mut hits,
    );
    (total, hits)
}

/// Cheapest vertex set (excluding `s`, `t`) that disconnects `t` from `s`.
pub fn brute_vertex_cut(g: &Graph, s: usize, t: usize) -> f64 {
    let cand: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| v != s && v != t)
        .collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << cand.len() {
        let w: Vec<usize> = (0..cand.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| cand[i])
            .collect();
        let c: f64 = w.iter().map(|&v| g.vertex_cost(v)).sum();
        if c < best
            && g.shortest_distance(s, t, &w, ElementMode::Vertex)
                .unwrap()
                .is_infinite()
        {
            best = c;
        }
    }
    best
}

/// Edge ids of every simple `s`-`t` path, parallel arcs counted separately.
pub fn all_simple_paths(g: &Graph, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(
        g: &Graph,
        t: usize,
        verts: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *verts.last().unwrap();
        if cur == t {
            out.push(edges.clone());
            return;
        }
        for a in g.out_arcs(cur) {
            if verts.contains(&a.head) {
                continue;
            }
            verts.push(a.head);
            edges.push(a.edge);
            rec(g, t, verts, edges, out);
            edges.pop();
            verts.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, t, &mut vec![s], &mut Vec::new(), &mut out);
    out
}
