//! The family of short simple paths between target pairs, its covering view,
//! and the sequential random walk that samples from it.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Arc, ElementMode, Graph};
use crate::instance::{Limits, PseudocutInstance};

/// A simple path between the endpoints of one target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub pair: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub length: f64,
}

impl Path {
    /// Vertex ids in vertex mode, edge ids in edge mode.
    pub fn elements(&self, mode: ElementMode) -> &[usize] {
        match mode {
            ElementMode::Vertex => &self.vertices,
            ElementMode::Edge => &self.edges,
        }
    }
}

/// Hitting-set view of a path family: every path must contain a chosen element.
#[derive(Debug, Clone)]
pub struct CoveringInstance {
    mode: ElementMode,
    paths: Vec<Path>,
    // All elements on each path, sorted.
    members: Vec<Vec<usize>>,
    // Removable elements on each path, sorted: the covering constraint rows.
    rows: Vec<Vec<usize>>,
    // Element -> indices of rows containing it.
    covers: Vec<Vec<usize>>,
    costs: Vec<f64>,
    hop_bound: usize,
}

impl CoveringInstance {
    /// Builds the covering instance for `paths` enumerated from `inst`.
    pub fn from_paths(inst: &PseudocutInstance, paths: Vec<Path>) -> Self {
        let mode = inst.mode();
        let members: Vec<Vec<usize>> = paths
            .iter()
            .map(|p| {
                let mut m = p.elements(mode).to_vec();
                m.sort_unstable();
                m
            })
            .collect();
        let rows = members
            .iter()
            .map(|m| {
                m.iter()
                    .copied()
                    .filter(|&e| inst.is_removable(e))
                    .collect()
            })
            .collect();
        let costs = inst.graph().element_costs(mode).to_vec();
        let mut cov = CoveringInstance {
            mode,
            paths,
            members,
            rows,
            covers: Vec::new(),
            costs,
            hop_bound: inst.hop_bound(),
        };
        cov.index_covers();
        cov
    }

    /// A bare covering instance over abstract sets, without backing paths.
    ///
    /// `hop_bound + 1` must bound the size of every set for the LP rounding
    /// guarantee to hold.
    pub fn from_sets(costs: Vec<f64>, sets: Vec<Vec<usize>>, hop_bound: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(sets.len());
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&e| e >= costs.len()) {
                return Err(Error::InvalidInput(format!(
                    "set element {bad} has no cost"
                )));
            }
            rows.push(s);
        }
        let mut cov = CoveringInstance {
            mode: ElementMode::Vertex,
            paths: Vec::new(),
            members: rows.clone(),
            rows,
            covers: Vec::new(),
            costs,
            hop_bound,
        };
        cov.index_covers();
        Ok(cov)
    }

    fn index_covers(&mut self) {
        let mut covers = vec![Vec::new(); self.costs.len()];
        for (p, row) in self.rows.iter().enumerate() {
            for &e in row {
                covers[e].push(p);
            }
        }
        self.covers = covers;
    }

    pub fn mode(&self) -> ElementMode {
        self.mode
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Removable elements of constraint `p`.
    pub fn row(&self, p: usize) -> &[usize] {
        &self.rows[p]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Constraints (paths) that element `e` lies on.
    pub fn covers(&self, e: usize) -> &[usize] {
        &self.covers[e]
    }

    pub fn element_count(&self) -> usize {
        self.costs.len()
    }

    pub fn cost(&self, e: usize) -> f64 {
        self.costs[e]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn hop_bound(&self) -> usize {
        self.hop_bound
    }

    /// Elements lying on at least one path, ascending.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.costs.len())
            .filter(|&e| !self.covers[e].is_empty())
            .collect()
    }

    /// Fails if some path has no removable element, i.e. nothing can break it.
    pub fn ensure_coverable(&self) -> Result<()> {
        match self.rows.iter().position(Vec::is_empty) {
            None => Ok(()),
            Some(p) => Err(Error::Infeasible(format!(
                "path {p} consists only of forbidden elements"
            ))),
        }
    }

    /// True iff `w` contains an element of every path.
    pub fn is_hit_by(&self, w: &[usize]) -> bool {
        let mut mask = vec![false; self.costs.len()];
        for &e in w {
            if e < mask.len() {
                mask[e] = true;
            }
        }
        self.members.iter().all(|m| m.iter().any(|&e| mask[e]))
    }

    /// One path per line: `pair_index: v0 v1 ... vl length`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for p in &self.paths {
            let _ = write!(s, "{}:", p.pair);
            for v in &p.vertices {
                let _ = write!(s, " {v}");
            }
            let _ = writeln!(s, " {}", p.length);
        }
        s
    }
}

/// Number of paths in `cov` that share at least one element with `w`.
pub fn count_paths_through(cov: &CoveringInstance, w: &[usize]) -> usize {
    let mut mask = vec![false; cov.element_count()];
    for &e in w {
        if e < mask.len() {
            mask[e] = true;
        }
    }
    cov.members
        .iter()
        .filter(|m| m.iter().any(|&e| mask[e]))
        .count()
}

/// Enumerates every simple path of length at most `T` between each target pair.
///
/// Output is ordered by pair index, then vertex sequence, then edge sequence.
pub fn enumerate_paths(inst: &PseudocutInstance, limits: &Limits) -> Result<CoveringInstance> {
    inst.ensure_valid_structure()?;
    let mut all = Vec::new();
    let counter = AtomicUsize::new(0);
    for (pair, &(s, t)) in inst.targets().iter().enumerate() {
        let mut paths = enumerate_pair(
            inst.graph(),
            inst.mode(),
            s,
            t,
            inst.threshold(),
            &counter,
            limits,
        )
        .map_err(|e| match e {
            Error::Budget {
                resource,
                detail,
                incumbent,
            } => Error::Budget {
                resource,
                detail: format!("{detail} while enumerating pair {pair} ({s}, {t})"),
                incumbent,
            },
            other => other,
        })?;
        for p in &mut paths {
            p.pair = pair;
        }
        all.extend(paths);
    }
    Ok(CoveringInstance::from_paths(inst, all))
}

fn arcs_for(g: &Graph, mode: ElementMode, u: usize) -> Vec<Arc> {
    match mode {
        ElementMode::Vertex => g.simple_out_arcs(u).collect(),
        ElementMode::Edge => g.out_arcs(u).to_vec(),
    }
}

/// All simple `s`-`t` paths of length at most `threshold` in `g`.
pub(crate) fn enumerate_pair(
    g: &Graph,
    mode: ElementMode,
    s: usize,
    t: usize,
    threshold: f64,
    counter: &AtomicUsize,
    limits: &Limits,
) -> Result<Vec<Path>> {
    if s == t {
        return Ok(Vec::new());
    }
    let to_t = g.distances_to(t);
    let slack = 1e-9 * threshold.abs().max(1.0);
    if to_t[s] > threshold + slack {
        return Ok(Vec::new());
    }
    let abort = AtomicBool::new(false);
    let first = arcs_for(g, mode, s);
    // Work is split by first arc; results are merged back in arc order.
    let chunks: Vec<Result<Vec<Path>>> = first
        .par_iter()
        .map(|&arc| {
            let len = g.length(arc.edge);
            if len > threshold || len + to_t[arc.head] > threshold + slack {
                return Ok(Vec::new());
            }
            let mut dfs = Dfs {
                g,
                mode,
                t,
                threshold,
                slack,
                to_t: &to_t,
                on_path: vec![false; g.vertex_count()],
                vertices: vec![s, arc.head],
                edges: vec![arc.edge],
                out: Vec::new(),
                counter,
                abort: &abort,
                limits,
                steps: 0,
            };
            dfs.on_path[s] = true;
            dfs.on_path[arc.head] = true;
            dfs.extend(len)?;
            Ok(dfs.out)
        })
        .collect();
    let mut paths = Vec::new();
    for chunk in chunks {
        paths.extend(chunk?);
    }
    paths.sort_by(|a, b| {
        a.vertices
            .cmp(&b.vertices)
            .then_with(|| a.edges.cmp(&b.edges))
    });
    Ok(paths)
}

struct Dfs<'a> {
    g: &'a Graph,
    mode: ElementMode,
    t: usize,
    threshold: f64,
    slack: f64,
    to_t: &'a [f64],
    on_path: Vec<bool>,
    vertices: Vec<usize>,
    edges: Vec<usize>,
    out: Vec<Path>,
    counter: &'a AtomicUsize,
    abort: &'a AtomicBool,
    limits: &'a Limits,
    steps: u64,
}

impl Dfs<'_> {
    fn extend(&mut self, len: f64) -> Result<()> {
        let u = *self.vertices.last().expect("non-empty prefix");
        if u == self.t {
            let total = self.counter.fetch_add(1, Ordering::Relaxed) + 1;
            if total > self.limits.max_paths {
                self.abort.store(true, Ordering::Relaxed);
                return Err(Error::budget(
                    "path",
                    format!("more than {} paths", self.limits.max_paths),
                ));
            }
            self.out.push(Path {
                pair: 0,
                vertices: self.vertices.clone(),
                edges: self.edges.clone(),
                length: len,
            });
            return Ok(());
        }
        self.steps += 1;
        if self.steps.is_multiple_of(4096) {
            if self.abort.load(Ordering::Relaxed) {
                return Err(Error::budget("path", "enumeration aborted"));
            }
            self.limits.check_deadline()?;
        }
        for arc in arcs_for(self.g, self.mode, u) {
            if self.on_path[arc.head] {
                continue;
            }
            let next = len + self.g.length(arc.edge);
            if next > self.threshold || next + self.to_t[arc.head] > self.threshold + self.slack {
                continue;
            }
            self.on_path[arc.head] = true;
            self.vertices.push(arc.head);
            self.edges.push(arc.edge);
            let res = self.extend(next);
            self.vertices.pop();
            self.edges.pop();
            self.on_path[arc.head] = false;
            res?;
        }
        Ok(())
    }
}

/// A walk drawn by [`sample_path`] with its exact probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub length: f64,
    /// Product of `1/|N(u_i)|` over the choices made.
    pub probability: f64,
    /// Product of `|N(u_i)|`, i.e. `1 / probability` computed without division.
    pub inv_probability: f64,
    /// The walk ended at the target within the threshold.
    pub hit: bool,
}

impl SampledPath {
    pub fn elements(&self, mode: ElementMode) -> &[usize] {
        match mode {
            ElementMode::Vertex => &self.vertices,
            ElementMode::Edge => &self.edges,
        }
    }
}

/// Reusable scratch space for drawing many walks on one graph.
#[derive(Debug, Clone)]
pub struct PathSampler {
    on_path: Vec<bool>,
    candidates: Vec<Arc>,
}

impl PathSampler {
    pub fn new(vertex_count: usize) -> Self {
        PathSampler {
            on_path: vec![false; vertex_count],
            candidates: Vec::new(),
        }
    }

    /// Uniform sequential walk from `u`: each step picks uniformly among
    /// unvisited, unremoved neighbours that keep the length within
    /// `threshold`; the walk stops at `v` or when no neighbour qualifies.
    #[allow(clippy::too_many_arguments)]
    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        u: usize,
        v: usize,
        threshold: f64,
        mode: ElementMode,
        removed: &[bool],
        rng: &mut R,
    ) -> SampledPath {
        let mut vertices = vec![u];
        let mut edges = Vec::new();
        let mut length = 0.0;
        let mut inv = 1.0f64;
        let vertex_removed = |x: usize| mode == ElementMode::Vertex && removed[x];
        if !vertex_removed(u) {
            self.on_path[u] = true;
            let mut cur = u;
            while cur != v {
                self.candidates.clear();
                let arcs: Box<dyn Iterator<Item = Arc>> = match mode {
                    ElementMode::Vertex => Box::new(g.simple_out_arcs(cur)),
                    ElementMode::Edge => Box::new(g.out_arcs(cur).iter().copied()),
                };
                for arc in arcs {
                    if self.on_path[arc.head] || vertex_removed(arc.head) {
                        continue;
                    }
                    if mode == ElementMode::Edge && removed[arc.edge] {
                        continue;
                    }
                    if length + g.length(arc.edge) <= threshold {
                        self.candidates.push(arc);
                    }
                }
                if self.candidates.is_empty() {
                    break;
                }
                let pick = self.candidates[rng.gen_range(0..self.candidates.len())];
                inv *= self.candidates.len() as f64;
                length += g.length(pick.edge);
                self.on_path[pick.head] = true;
                vertices.push(pick.head);
                edges.push(pick.edge);
                cur = pick.head;
            }
            for &x in &vertices {
                self.on_path[x] = false;
            }
        }
        let hit = *vertices.last().expect("walk starts at u") == v && u != v && !vertex_removed(u);
        SampledPath {
            vertices,
            edges,
            length,
            probability: 1.0 / inv,
            inv_probability: inv,
            hit,
        }
    }
}

/// Draws one walk from `u` toward `v`; see [`PathSampler::sample`].
pub fn sample_path<R: Rng + ?Sized>(
    g: &Graph,
    u: usize,
    v: usize,
    threshold: f64,
    mode: ElementMode,
    removed: &[bool],
    rng: &mut R,
) -> SampledPath {
    PathSampler::new(g.vertex_count()).sample(g, u, v, threshold, mode, removed, rng)
}
