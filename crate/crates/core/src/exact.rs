//! Exact solvers: branch and bound over the path family, and the polynomial
//! cases for hop bounds 1 to 3 with uniform lengths and costs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use crate::approx::greedy_cover;
use crate::error::{Error, Result};
use crate::graph::ElementMode;
use crate::instance::{Limits, PseudocutInstance};
use crate::pathspace::{enumerate_paths, CoveringInstance};
use crate::solution::Solution;

const COST_EPS: f64 = 1e-9;

/// A minimum-cost hitting set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCover {
    /// Sorted element ids.
    pub elements: Vec<usize>,
    pub cost: f64,
    /// Search nodes expanded.
    pub nodes: u64,
}

struct Search<'a> {
    cov: &'a CoveringInstance,
    limits: &'a Limits,
    // Chosen elements on each row.
    hits: Vec<u32>,
    // Row elements neither chosen nor excluded.
    free: Vec<u32>,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    cost: f64,
    best: Option<Vec<usize>>,
    best_cost: f64,
    nodes: u64,
    residual: Vec<f64>,
    stop: Option<Error>,
}

impl Search<'_> {
    fn include(&mut self, e: usize) {
        self.chosen.push(e);
        self.cost += self.cov.cost(e);
        for &p in self.cov.covers(e) {
            self.hits[p] += 1;
            self.free[p] -= 1;
        }
    }

    fn uninclude(&mut self, e: usize) {
        self.chosen.pop();
        self.cost -= self.cov.cost(e);
        for &p in self.cov.covers(e) {
            self.hits[p] -= 1;
            self.free[p] += 1;
        }
    }

    fn exclude(&mut self, e: usize) {
        self.excluded[e] = true;
        for &p in self.cov.covers(e) {
            self.free[p] -= 1;
        }
    }

    fn unexclude(&mut self, e: usize) {
        self.excluded[e] = false;
        for &p in self.cov.covers(e) {
            self.free[p] += 1;
        }
    }

    fn is_free(&self, e: usize) -> bool {
        !self.excluded[e] && !self.chosen.contains(&e)
    }

    /// Dual-feasible packing over uncovered rows: each row takes the smallest
    /// residual cost among its free elements.
    fn lower_bound(&mut self) -> f64 {
        let cov = self.cov;
        self.residual.copy_from_slice(cov.costs());
        let mut bound = 0.0;
        for p in 0..cov.len() {
            if self.hits[p] > 0 {
                continue;
            }
            let y = cov
                .row(p)
                .iter()
                .filter(|&&e| !self.excluded[e])
                .map(|&e| self.residual[e])
                .fold(f64::INFINITY, f64::min);
            if !y.is_finite() || y <= 0.0 {
                continue;
            }
            bound += y;
            for &e in cov.row(p) {
                if !self.excluded[e] {
                    self.residual[e] -= y;
                }
            }
        }
        bound
    }

    fn run(&mut self) {
        if self.stop.is_some() {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_search_nodes {
            self.stop = Some(Error::budget(
                "search node",
                format!("{} nodes expanded", self.limits.max_search_nodes),
            ));
            return;
        }
        if self.nodes.is_multiple_of(4096) {
            if let Err(e) = self.limits.check_deadline() {
                self.stop = Some(e);
                return;
            }
        }
        let mut branch: Option<(usize, u32)> = None;
        for p in 0..self.cov.len() {
            if self.hits[p] == 0 && branch.is_none_or(|(_, f)| self.free[p] < f) {
                branch = Some((p, self.free[p]));
            }
        }
        let Some((row, free)) = branch else {
            if self.cost < self.best_cost - COST_EPS {
                let mut w = self.chosen.clone();
                w.sort_unstable();
                self.best = Some(w);
                self.best_cost = self.cost;
            }
            return;
        };
        if free == 0 || self.cost + self.lower_bound() >= self.best_cost - COST_EPS {
            return;
        }
        let mut options: Vec<usize> = self
            .cov
            .row(row)
            .iter()
            .copied()
            .filter(|&e| self.is_free(e))
            .collect();
        options.sort_by(|&a, &b| {
            self.cov
                .cost(a)
                .total_cmp(&self.cov.cost(b))
                .then(a.cmp(&b))
        });
        let mut excluded_here = Vec::new();
        for &e in &options {
            if self.cost + self.cov.cost(e) < self.best_cost - COST_EPS {
                self.include(e);
                self.run();
                self.uninclude(e);
            }
            if self.stop.is_some() {
                break;
            }
            self.exclude(e);
            excluded_here.push(e);
        }
        for e in excluded_here {
            self.unexclude(e);
        }
    }
}

struct Outcome {
    best: Option<ExactCover>,
    stop: Option<Error>,
}

fn search(cov: &CoveringInstance, cost_cap: Option<f64>, limits: &Limits) -> Result<Outcome> {
    cov.ensure_coverable()?;
    let greedy = greedy_cover(cov)?;
    let greedy_cost: f64 = greedy.iter().map(|&e| cov.cost(e)).sum();
    let (best, best_cost) = match cost_cap {
        Some(cap) if cap + COST_EPS < greedy_cost => (None, cap + 2.0 * COST_EPS),
        _ => {
            let mut g = greedy;
            g.sort_unstable();
            (Some(g), greedy_cost)
        }
    };
    let mut s = Search {
        cov,
        limits,
        hits: vec![0; cov.len()],
        free: cov.rows().iter().map(|r| r.len() as u32).collect(),
        excluded: vec![false; cov.element_count()],
        chosen: Vec::new(),
        cost: 0.0,
        best,
        best_cost,
        nodes: 0,
        residual: vec![0.0; cov.element_count()],
        stop: None,
    };
    s.run();
    let nodes = s.nodes;
    let best = s.best.map(|elements| ExactCover {
        cost: elements
            .iter()
            .map(|&e| cov.cost(e))
            .fold(0.0, |a, c| a + c),
        elements,
        nodes,
    });
    Ok(Outcome { best, stop: s.stop })
}

/// Minimum-cost hitting set of the rows of `cov`, by branch and bound.
///
/// With `cost_cap`, only sets costing at most the cap are sought and `None` is
/// returned when there are none.
pub fn opt_hitting_set(
    cov: &CoveringInstance,
    cost_cap: Option<f64>,
    limits: &Limits,
) -> Result<Option<ExactCover>> {
    let out = search(cov, cost_cap, limits)?;
    match out.stop {
        None => Ok(out.best),
        Some(Error::Budget {
            resource, detail, ..
        }) => Err(Error::Budget {
            resource,
            detail: match &out.best {
                Some(b) => format!("{detail}; best cost found {}", b.cost),
                None => detail,
            },
            incumbent: None,
        }),
        Some(e) => Err(e),
    }
}

/// Optimal solution of `inst` via enumeration and [`opt_hitting_set`].
///
/// A search budget error carries the best solution found so far.
pub fn opt(inst: &PseudocutInstance, limits: &Limits) -> Result<Solution> {
    let started = Instant::now();
    inst.ensure_valid()?;
    let cov = enumerate_paths(inst, limits)?;
    let out = search(&cov, None, limits)?;
    let best = out
        .best
        .expect("greedy incumbent always exists without a cap");
    match out.stop {
        None => Solution::build(inst, "OPT", best.elements, None, started),
        Some(Error::Budget {
            resource, detail, ..
        }) => {
            let incumbent = Solution::build(inst, "OPT", best.elements, None, started)?;
            Err(Error::Budget {
                resource,
                detail,
                incumbent: Some(Box::new(incumbent)),
            })
        }
        Some(e) => Err(e),
    }
}

/// Maximum bipartite matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
    pub size: usize,
}

/// Hopcroft-Karp on a bipartite graph given as left adjacency lists.
pub fn hopcroft_karp(right_count: usize, adj: &[Vec<usize>]) -> Matching {
    let n = adj.len();
    let mut left: Vec<Option<usize>> = vec![None; n];
    let mut right: Vec<Option<usize>> = vec![None; right_count];
    let mut size = 0;
    let mut dist = vec![usize::MAX; n];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..n {
            if left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match right[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; n];
        for u in 0..n {
            if left[u].is_none() && augment(u, adj, &mut left, &mut right, &mut dist, &mut next) {
                size += 1;
            }
        }
    }
    Matching { left, right, size }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    left: &mut [Option<usize>],
    right: &mut [Option<usize>],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let ok = match right[v] {
            None => true,
            Some(w) => dist[w] == dist[u] + 1 && augment(w, adj, left, right, dist, next),
        };
        if ok {
            left[u] = Some(v);
            right[v] = Some(u);
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Minimum vertex cover from a maximum matching: with `Z` the vertices reached
/// from unmatched left vertices along alternating paths, the cover is
/// `(left \ Z) ∪ (right ∩ Z)`. Returns (left ids, right ids).
pub fn konig_cover(adj: &[Vec<usize>], m: &Matching) -> (Vec<usize>, Vec<usize>) {
    let mut seen_left = vec![false; adj.len()];
    let mut seen_right = vec![false; m.right.len()];
    let mut stack: Vec<usize> = (0..adj.len()).filter(|&u| m.left[u].is_none()).collect();
    for &u in &stack {
        seen_left[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if seen_right[v] || m.left[u] == Some(v) {
                continue;
            }
            seen_right[v] = true;
            if let Some(w) = m.right[v] {
                if !seen_left[w] {
                    seen_left[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    let l = (0..adj.len()).filter(|&u| !seen_left[u]).collect();
    let r = (0..m.right.len()).filter(|&v| seen_right[v]).collect();
    (l, r)
}

/// Checks the preconditions shared by the small-threshold solvers and returns
/// the single pair.
fn small_t_pair(inst: &PseudocutInstance, hops: &[usize]) -> Result<(usize, usize)> {
    let g = inst.graph();
    let fail = |why: String| {
        Err(Error::InvalidInput(format!(
            "small-threshold exact solver: {why}"
        )))
    };
    if inst.mode() != ElementMode::Vertex {
        return fail("vertex mode required".into());
    }
    if inst.k() != 1 {
        return fail(format!("one target pair required, got {}", inst.k()));
    }
    inst.ensure_valid_structure()?;
    let (s, t) = inst.targets()[0];
    if inst.forbidden().iter().any(|&v| v != s && v != t) {
        return fail("only the pair endpoints may be forbidden".into());
    }
    if let Some(q) = g.min_length() {
        if g.lengths().iter().any(|&d| d != q) {
            return fail("all edge lengths must be equal".into());
        }
    }
    let mut costs = (0..g.vertex_count())
        .filter(|&v| v != s && v != t)
        .map(|v| g.vertex_cost(v));
    if let Some(c0) = costs.next() {
        if !c0.is_finite() || costs.any(|c| c != c0) {
            return fail("vertex costs must be uniform and finite".into());
        }
    }
    let h = inst.hop_bound();
    if !hops.contains(&h) {
        return fail(format!(
            "hop bound floor(T / q) is {h}, expected one of {hops:?}"
        ));
    }
    if g.out_arcs(s).iter().any(|a| a.head == t) {
        return Err(Error::Infeasible(format!(
            "edge ({s}, {t}) cannot be broken in vertex mode"
        )));
    }
    Ok((s, t))
}

fn midpoints(inst: &PseudocutInstance, s: usize, t: usize) -> BTreeSet<usize> {
    let g = inst.graph();
    let into_t: BTreeSet<usize> = g.in_arcs(t).iter().map(|a| a.head).collect();
    g.out_arcs(s)
        .iter()
        .map(|a| a.head)
        .filter(|x| *x != t && into_t.contains(x))
        .collect()
}

/// Hop bound 2: every two-hop midpoint must go.
pub fn exact_t2(inst: &PseudocutInstance) -> Result<Solution> {
    let started = Instant::now();
    let (s, t) = small_t_pair(inst, &[2])?;
    Solution::build(
        inst,
        "T2-EXACT",
        midpoints(inst, s, t).into_iter().collect(),
        None,
        started,
    )
}

/// Hop bound 3: remove the two-hop midpoints, then cover the remaining
/// three-hop paths `s x y t` with a minimum vertex cover of the bipartite
/// graph on second and third positions.
pub fn exact_t3(inst: &PseudocutInstance) -> Result<Solution> {
    let started = Instant::now();
    let (s, t) = small_t_pair(inst, &[3])?;
    let mut chosen: Vec<usize> = midpoints(inst, s, t).into_iter().collect();
    let (xs, ys, adj) = three_hop_bipartite(inst, s, t, &chosen);
    let m = hopcroft_karp(ys.len(), &adj);
    let (cl, cr) = konig_cover(&adj, &m);
    debug_assert_eq!(cl.len() + cr.len(), m.size);
    chosen.extend(cl.into_iter().map(|i| xs[i]));
    chosen.extend(cr.into_iter().map(|j| ys[j]));
    Solution::build(inst, "T3-EXACT", chosen, None, started)
}

/// Bipartite graph of the three-hop paths avoiding `removed`: left ids map to
/// `xs`, right ids to `ys`.
pub fn three_hop_bipartite(
    inst: &PseudocutInstance,
    s: usize,
    t: usize,
    removed: &[usize],
) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
    let g = inst.graph();
    let gone: BTreeSet<usize> = removed.iter().copied().collect();
    let usable = |v: usize| v != s && v != t && !gone.contains(&v);
    let mut edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for x in g.out_arcs(s).iter().map(|a| a.head).filter(|&x| usable(x)) {
        for y in g
            .out_arcs(x)
            .iter()
            .map(|a| a.head)
            .filter(|&y| usable(y) && y != x)
        {
            if g.out_arcs(y).iter().any(|a| a.head == t) {
                edges.entry(x).or_default().insert(y);
            }
        }
    }
    let xs: Vec<usize> = edges.keys().copied().collect();
    let ys: Vec<usize> = edges
        .values()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let adj = edges
        .values()
        .map(|set| {
            set.iter()
                .map(|y| ys.binary_search(y).expect("listed"))
                .collect()
        })
        .collect();
    (xs, ys, adj)
}

/// Exact solver for hop bounds 1 to 3 under the uniform preconditions.
pub fn exact_small_t(inst: &PseudocutInstance) -> Result<Solution> {
    let started = Instant::now();
    let (_, _) = small_t_pair(inst, &[0, 1, 2, 3])?;
    match inst.hop_bound() {
        0 | 1 => Solution::build(inst, "T1-EXACT", Vec::new(), None, started),
        2 => exact_t2(inst),
        _ => exact_t3(inst),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_fig1, gen_tightness, TightnessLayout};
    use crate::graph::Graph;
    use std::sync::Arc;

    fn directed(n: usize, arcs: &[(usize, usize)]) -> Arc<Graph> {
        let mut g = Graph::new(n, true);
        for &(u, v) in arcs {
            g.add_edge(u, v, 1.0).unwrap();
        }
        Arc::new(g)
    }

    fn brute(cov: &CoveringInstance) -> f64 {
        let cand = cov.candidates();
        let mut best = f64::INFINITY;
        for mask in 0u32..1 << cand.len() {
            let w: Vec<usize> = (0..cand.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| cand[i])
                .collect();
            if cov.rows().iter().all(|r| r.iter().any(|e| w.contains(e))) {
                best = best.min(w.iter().map(|&e| cov.cost(e)).sum());
            }
        }
        best
    }

    #[test]
    fn fig1_optimum() {
        let (_, inst) = gen_fig1();
        let sol = opt(&inst, &Limits::default()).unwrap();
        assert_eq!(sol.elements, vec![5, 7]);
        assert_eq!(sol.cost, 2.0);
        assert!(sol.feasible);
    }

    #[test]
    fn tightness_optimum_is_the_two_outlets() {
        for k in 1..=5 {
            let (_, inst) = gen_tightness(k);
            let lay = TightnessLayout { k };
            let sol = opt(&inst, &Limits::default()).unwrap();
            assert_eq!(sol.cost, if k == 1 { 1.0 } else { 2.0 }, "k = {k}");
            // At k = 2, {g_1, g_2} ties with the outlets.
            if k > 2 {
                assert_eq!(sol.elements, vec![lay.o1(), lay.o2()]);
            }
        }
    }

    #[test]
    fn empty_family() {
        let cov = CoveringInstance::from_sets(vec![1.0; 3], vec![], 2).unwrap();
        let got = opt_hitting_set(&cov, None, &Limits::default())
            .unwrap()
            .unwrap();
        assert!(got.elements.is_empty());
        assert_eq!(got.cost, 0.0);
    }

    #[test]
    fn matches_brute_force_on_weighted_sets() {
        let cov = CoveringInstance::from_sets(
            vec![3.0, 2.0, 2.0, 1.5, 4.0, 1.0],
            vec![
                vec![0, 1],
                vec![1, 2, 3],
                vec![0, 4],
                vec![3, 5],
                vec![2, 4, 5],
                vec![0, 3],
            ],
            3,
        )
        .unwrap();
        let got = opt_hitting_set(&cov, None, &Limits::default())
            .unwrap()
            .unwrap();
        assert!((got.cost - brute(&cov)).abs() < 1e-12);
        assert!(cov.is_hit_by(&got.elements));
    }

    #[test]
    fn cost_cap_excludes_everything_above() {
        let cov =
            CoveringInstance::from_sets(vec![1.0; 4], vec![vec![0, 1], vec![2, 3]], 1).unwrap();
        assert!(opt_hitting_set(&cov, Some(1.5), &Limits::default())
            .unwrap()
            .is_none());
        assert_eq!(
            opt_hitting_set(&cov, Some(2.0), &Limits::default())
                .unwrap()
                .unwrap()
                .cost,
            2.0
        );
    }

    #[test]
    fn node_budget_reports_incumbent() {
        let (_, inst) = gen_tightness(4);
        let limits = Limits {
            max_search_nodes: 1,
            ..Limits::default()
        };
        match opt(&inst, &limits) {
            Err(Error::Budget {
                incumbent: Some(sol),
                ..
            }) => assert!(sol.feasible),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn t2_examples() {
        let inst =
            PseudocutInstance::single(directed(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]), 2.0, 0, 3)
                .unwrap();
        assert_eq!(exact_t2(&inst).unwrap().elements, vec![1, 2]);

        let inst =
            PseudocutInstance::single(directed(4, &[(0, 1), (1, 2), (2, 3)]), 2.0, 0, 3).unwrap();
        assert!(exact_t2(&inst).unwrap().elements.is_empty());

        let inst =
            PseudocutInstance::single(directed(4, &[(0, 1), (1, 3), (0, 2)]), 2.0, 0, 3).unwrap();
        assert_eq!(exact_t2(&inst).unwrap().elements, vec![1]);
    }

    #[test]
    fn t3_three_hop_shape() {
        // s = 0, x1..x3 = 1..3, y1..y3 = 4..6, t = 7.
        let arcs = [
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 4),
            (2, 4),
            (3, 4),
            (3, 5),
            (3, 6),
            (4, 7),
            (5, 7),
            (6, 7),
        ];
        let inst = PseudocutInstance::single(directed(8, &arcs), 3.0, 0, 7).unwrap();
        let sol = exact_t3(&inst).unwrap();
        assert_eq!(sol.elements, vec![3, 4]);
        assert!(sol.feasible);
    }

    #[test]
    fn t3_two_hop_only_and_disjoint_paths() {
        let inst = PseudocutInstance::single(directed(3, &[(0, 1), (1, 2)]), 3.0, 0, 2).unwrap();
        assert_eq!(exact_t3(&inst).unwrap().elements, vec![1]);

        let mut arcs = Vec::new();
        for i in 0..3 {
            let (x, y) = (1 + 2 * i, 2 + 2 * i);
            arcs.extend([(0, x), (x, y), (y, 7)]);
        }
        let inst = PseudocutInstance::single(directed(8, &arcs), 3.0, 0, 7).unwrap();
        let sol = exact_t3(&inst).unwrap();
        assert_eq!(sol.cost, 3.0);
        assert!(sol.feasible);
    }

    #[test]
    fn small_t_preconditions() {
        let g = directed(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let inst = PseudocutInstance::single(g.clone(), 3.0, 0, 3).unwrap();
        assert!(matches!(exact_t2(&inst), Err(Error::InvalidInput(_))));
        let mut weighted = (*g).clone();
        weighted.set_vertex_cost(1, 2.0).unwrap();
        let inst = PseudocutInstance::single(Arc::new(weighted), 2.0, 0, 3).unwrap();
        assert!(matches!(exact_t2(&inst), Err(Error::InvalidInput(_))));

        let direct = directed(2, &[(0, 1)]);
        let inst = PseudocutInstance::single(direct, 1.0, 0, 1).unwrap();
        assert!(matches!(exact_small_t(&inst), Err(Error::Infeasible(_))));
        let inst = PseudocutInstance::single(directed(3, &[(0, 1), (1, 2)]), 1.0, 0, 2).unwrap();
        assert!(exact_small_t(&inst).unwrap().elements.is_empty());
    }

    #[test]
    fn konig_matches_matching_size() {
        let adj = vec![vec![0], vec![0], vec![0, 1, 2]];
        let m = hopcroft_karp(3, &adj);
        assert_eq!(m.size, 2);
        let (l, r) = konig_cover(&adj, &m);
        assert_eq!(l.len() + r.len(), 2);
        for (u, row) in adj.iter().enumerate() {
            for v in row {
                assert!(l.contains(&u) || r.contains(v));
            }
        }
    }
}
