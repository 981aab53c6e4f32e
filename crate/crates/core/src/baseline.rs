//! Minimum vertex cut baseline and the packet-error-rate length transform.

use std::collections::VecDeque;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{ElementMode, Graph};
use crate::instance::PseudocutInstance;
use crate::solution::Solution;

const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCut {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// Total cost of the cut, equal to the max-flow value.
    pub value: f64,
}

struct FlowEdge {
    to: usize,
    cap: f64,
}

struct Dinic {
    edges: Vec<FlowEdge>,
    adj: Vec<Vec<usize>>,
    level: Vec<usize>,
    next: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: f64) {
        self.adj[u].push(self.edges.len());
        self.edges.push(FlowEdge { to: v, cap });
        self.adj[v].push(self.edges.len());
        self.edges.push(FlowEdge { to: u, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize) {
        self.level.fill(usize::MAX);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.adj[u] {
                let e = &self.edges[id];
                if e.cap > FLOW_EPS && self.level[e.to] == usize::MAX {
                    self.level[e.to] = self.level[u] + 1;
                    q.push_back(e.to);
                }
            }
        }
    }

    fn push(&mut self, u: usize, t: usize, limit: f64) -> f64 {
        if u == t {
            return limit;
        }
        while self.next[u] < self.adj[u].len() {
            let id = self.adj[u][self.next[u]];
            let (to, cap) = (self.edges[id].to, self.edges[id].cap);
            if cap > FLOW_EPS && self.level[to] == self.level[u] + 1 {
                let got = self.push(to, t, limit.min(cap));
                if got > 0.0 {
                    if cap.is_finite() {
                        self.edges[id].cap -= got;
                    }
                    if self.edges[id ^ 1].cap.is_finite() {
                        self.edges[id ^ 1].cap += got;
                    }
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] == usize::MAX {
                return total;
            }
            self.next.fill(0);
            loop {
                let f = self.push(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                if f.is_infinite() {
                    return f;
                }
                total += f;
            }
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &id in &self.adj[u] {
                let e = &self.edges[id];
                if e.cap > FLOW_EPS && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }
}

/// Minimum-cost vertex set (excluding `s` and `t`) whose removal disconnects
/// `t` from `s`, by node splitting and max flow. Vertices with the unremovable
/// sentinel cost, or listed in `keep`, are never cut.
pub fn min_vertex_cut_keeping(g: &Graph, s: usize, t: usize, keep: &[usize]) -> Result<VertexCut> {
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    if s == t {
        return Err(Error::InvalidInput("source and sink coincide".into()));
    }
    let n = g.vertex_count();
    let (vin, vout) = (|v: usize| 2 * v, |v: usize| 2 * v + 1);
    let mut net = Dinic::new(2 * n);
    for v in 0..n {
        let cap = if v == s || v == t || keep.contains(&v) {
            f64::INFINITY
        } else {
            g.vertex_cost(v)
        };
        net.add(vin(v), vout(v), cap);
    }
    for e in 0..g.edge_count() {
        let (u, v) = g.endpoints(e);
        net.add(vout(u), vin(v), f64::INFINITY);
        if !g.is_directed() {
            net.add(vout(v), vin(u), f64::INFINITY);
        }
    }
    let value = net.max_flow(vin(s), vout(t));
    if value.is_infinite() {
        return Err(Error::Infeasible(format!(
            "no finite vertex cut separates {s} from {t}"
        )));
    }
    let seen = net.reachable(vin(s));
    let vertices: Vec<usize> = (0..n).filter(|&v| seen[vin(v)] && !seen[vout(v)]).collect();
    let value = vertices
        .iter()
        .map(|&v| g.vertex_cost(v))
        .fold(0.0, |a, c| a + c);
    Ok(VertexCut { vertices, value })
}

pub fn min_vertex_cut(g: &Graph, s: usize, t: usize) -> Result<VertexCut> {
    min_vertex_cut_keeping(g, s, t, &[])
}

/// The cut baseline as a solver: cuts the single pair of `inst` regardless of `T`.
pub fn mc(inst: &PseudocutInstance) -> Result<Solution> {
    let started = Instant::now();
    if inst.mode() != ElementMode::Vertex || inst.k() != 1 {
        return Err(Error::InvalidInput(
            "the cut baseline needs vertex mode and one pair".into(),
        ));
    }
    inst.ensure_valid_structure()?;
    let (s, t) = inst.targets()[0];
    let keep: Vec<usize> = inst.forbidden().iter().copied().collect();
    let cut = min_vertex_cut_keeping(inst.graph(), s, t, &keep)?;
    Solution::build(inst, "MC", cut.vertices, None, started)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must lie in (0, 1), got {p}"
        )))
    }
}

/// Additive length `-ln(1 - p)` of a link with packet error rate `p`.
pub fn per_to_length(p: f64) -> Result<f64> {
    check_probability(p, "packet error rate")?;
    Ok(-(-p).ln_1p())
}

/// Length threshold equivalent to a cumulative error-rate bound `P`.
pub fn per_threshold(p: f64) -> Result<f64> {
    check_probability(p, "error-rate threshold")?;
    Ok(-(-p).ln_1p())
}

/// Copy of `g` whose lengths, read as error rates, are replaced by
/// [`per_to_length`].
pub fn transform_per_graph(g: &Graph) -> Result<Graph> {
    let mut out = g.clone();
    for e in 0..g.edge_count() {
        let d = per_to_length(g.length(e)).map_err(|err| match err {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("edge {e}: {msg}")),
            other => other,
        })?;
        out.set_length(e, d);
    }
    Ok(out)
}

/// Lowest cumulative error rate over `s`-`t` routes of a graph whose lengths
/// are per-link error rates: `1 - exp(-d(s, t))` on the transformed graph.
pub fn cumulative_per(g: &Graph, s: usize, t: usize) -> Result<f64> {
    let h = transform_per_graph(g)?;
    let d = h.shortest_distance(s, t, &[], ElementMode::Vertex)?;
    Ok(-(-d).exp_m1())
}
