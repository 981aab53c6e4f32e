//! Directed weighted graph with removable vertices or edges.
//!
//! Undirected inputs are stored as two arcs that share one edge id, so removing
//! that edge in edge mode deletes both directions at once.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost marking an element that may never be removed.
pub const UNREMOVABLE: f64 = f64::INFINITY;

/// Whether solutions consist of vertices or of edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ElementMode {
    #[default]
    Vertex,
    Edge,
}

impl std::str::FromStr for ElementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(ElementMode::Vertex),
            "edge" => Ok(ElementMode::Edge),
            other => Err(Error::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ElementMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ElementMode::Vertex => "vertex",
            ElementMode::Edge => "edge",
        })
    }
}

/// One direction of an edge as seen from its tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub head: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    out: Vec<Vec<Arc>>,
    inc: Vec<Vec<Arc>>,
    // Per out-arc flag: another arc u->v with smaller (length, id) exists.
    shadowed: Vec<Vec<bool>>,
    endpoints: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    edge_costs: Vec<f64>,
    vertex_costs: Vec<f64>,
}

impl Graph {
    pub fn new(vertex_count: usize, directed: bool) -> Self {
        Graph {
            directed,
            out: vec![Vec::new(); vertex_count],
            inc: vec![Vec::new(); vertex_count],
            shadowed: vec![Vec::new(); vertex_count],
            endpoints: Vec::new(),
            lengths: Vec::new(),
            edge_costs: Vec::new(),
            vertex_costs: vec![1.0; vertex_count],
        }
    }

    /// Adds an edge with unit cost and returns its id.
    ///
    /// Lengths are stored as given; non-positive lengths and self-loops are
    /// reported by instance validation rather than rejected here.
    pub fn add_edge(&mut self, u: usize, v: usize, length: f64) -> Result<usize> {
        self.add_edge_with_cost(u, v, length, 1.0)
    }

    pub fn add_edge_with_cost(
        &mut self,
        u: usize,
        v: usize,
        length: f64,
        cost: f64,
    ) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let id = self.endpoints.len();
        self.endpoints.push((u, v));
        self.lengths.push(length);
        self.edge_costs.push(cost);
        self.push_arc(u, v, id);
        if !self.directed && u != v {
            self.push_arc(v, u, id);
        }
        Ok(id)
    }

    fn push_arc(&mut self, u: usize, v: usize, id: usize) {
        let len = self.lengths[id];
        let mut shadowed = false;
        for (k, arc) in self.out[u].iter().enumerate() {
            if arc.head != v {
                continue;
            }
            // Ids grow monotonically, so on equal length the older arc wins.
            if self.lengths[arc.edge] <= len {
                shadowed = true;
            } else {
                self.shadowed[u][k] = true;
            }
        }
        self.out[u].push(Arc { head: v, edge: id });
        self.shadowed[u].push(shadowed);
        self.inc[v].push(Arc { head: u, edge: id });
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_arcs(&self, u: usize) -> &[Arc] {
        &self.out[u]
    }

    pub fn in_arcs(&self, v: usize) -> &[Arc] {
        &self.inc[v]
    }

    /// Out-arcs with parallel arcs collapsed to the shortest one.
    ///
    /// Vertex-mode paths are vertex sequences, so parallel arcs must not yield
    /// duplicate paths.
    pub fn simple_out_arcs(&self, u: usize) -> impl Iterator<Item = Arc> + '_ {
        self.out[u]
            .iter()
            .zip(&self.shadowed[u])
            .filter(|(_, &s)| !s)
            .map(|(a, _)| *a)
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.endpoints[edge]
    }

    pub fn length(&self, edge: usize) -> f64 {
        self.lengths[edge]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn set_length(&mut self, edge: usize, length: f64) {
        self.lengths[edge] = length;
        self.recompute_shadowing();
    }

    fn recompute_shadowing(&mut self) {
        for u in 0..self.out.len() {
            let arcs = &self.out[u];
            let mut flags = vec![false; arcs.len()];
            for (i, a) in arcs.iter().enumerate() {
                flags[i] = arcs.iter().any(|b| {
                    b.head == a.head
                        && b.edge != a.edge
                        && (self.lengths[b.edge], b.edge) < (self.lengths[a.edge], a.edge)
                });
            }
            self.shadowed[u] = flags;
        }
    }

    pub fn vertex_cost(&self, v: usize) -> f64 {
        self.vertex_costs[v]
    }

    pub fn vertex_costs(&self) -> &[f64] {
        &self.vertex_costs
    }

    pub fn set_vertex_cost(&mut self, v: usize, cost: f64) -> Result<()> {
        self.check_vertex(v)?;
        self.vertex_costs[v] = cost;
        Ok(())
    }

    pub fn edge_cost(&self, e: usize) -> f64 {
        self.edge_costs[e]
    }

    pub fn edge_costs(&self) -> &[f64] {
        &self.edge_costs
    }

    pub fn set_edge_cost(&mut self, e: usize, cost: f64) -> Result<()> {
        if e >= self.edge_count() {
            return Err(Error::InvalidInput(format!("edge id {e} out of range")));
        }
        self.edge_costs[e] = cost;
        Ok(())
    }

    pub fn element_count(&self, mode: ElementMode) -> usize {
        match mode {
            ElementMode::Vertex => self.vertex_count(),
            ElementMode::Edge => self.edge_count(),
        }
    }

    pub fn element_cost(&self, mode: ElementMode, id: usize) -> f64 {
        match mode {
            ElementMode::Vertex => self.vertex_costs[id],
            ElementMode::Edge => self.edge_costs[id],
        }
    }

    pub fn element_costs(&self, mode: ElementMode) -> &[f64] {
        match mode {
            ElementMode::Vertex => &self.vertex_costs,
            ElementMode::Edge => &self.edge_costs,
        }
    }

    /// Smallest edge length; `None` for an edgeless graph.
    pub fn min_length(&self) -> Option<f64> {
        self.lengths.iter().copied().reduce(f64::min)
    }

    /// Number of distinct edges incident to `v` (in plus out for directed graphs).
    pub fn degree(&self, v: usize) -> usize {
        if self.directed {
            self.out[v].len() + self.inc[v].len()
        } else {
            self.out[v].len()
        }
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "vertex id {v} out of range (n = {})",
                self.vertex_count()
            )))
        }
    }

    /// Builds a removal mask sized for `mode` from a list of element ids.
    pub fn removal_mask(&self, mode: ElementMode, removed: &[usize]) -> Result<Vec<bool>> {
        let count = self.element_count(mode);
        let mut mask = vec![false; count];
        for &e in removed {
            if e >= count {
                return Err(Error::InvalidInput(format!("{mode} id {e} out of range")));
            }
            mask[e] = true;
        }
        Ok(mask)
    }

    /// Shortest `u`-`v` distance with the given elements deleted.
    ///
    /// Returns `f64::INFINITY` when `v` is unreachable. A removed vertex is at
    /// infinite distance from everything, itself included.
    pub fn shortest_distance(
        &self,
        u: usize,
        v: usize,
        removed: &[usize],
        mode: ElementMode,
    ) -> Result<f64> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let mask = self.removal_mask(mode, removed)?;
        Ok(self.distance_masked(u, v, mode, &mask))
    }

    /// Distance query against a prebuilt removal mask. Ids must be valid.
    pub fn distance_masked(&self, u: usize, v: usize, mode: ElementMode, mask: &[bool]) -> f64 {
        let mut search = Dijkstra::new(self.vertex_count());
        search.run(self, u, Some(v), mode, mask, Direction::Forward);
        search.dist[v]
    }

    /// A shortest `u`-`v` path as (vertices, edges), or `None` if none exists.
    pub fn shortest_path_masked(
        &self,
        u: usize,
        v: usize,
        mode: ElementMode,
        mask: &[bool],
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut search = Dijkstra::new(self.vertex_count());
        search.run(self, u, Some(v), mode, mask, Direction::Forward);
        if !search.dist[v].is_finite() {
            return None;
        }
        let mut vertices = vec![v];
        let mut edges = Vec::new();
        let mut cur = v;
        while cur != u {
            let (prev, edge) = search.pred[cur].expect("reached vertex has a predecessor");
            edges.push(edge);
            vertices.push(prev);
            cur = prev;
        }
        vertices.reverse();
        edges.reverse();
        Some((vertices, edges))
    }

    /// Distances from every vertex to `target` (reverse search), without removals.
    pub fn distances_to(&self, target: usize) -> Vec<f64> {
        let mut search = Dijkstra::new(self.vertex_count());
        let mask = vec![false; self.vertex_count()];
        search.run(
            self,
            target,
            None,
            ElementMode::Vertex,
            &mask,
            Direction::Backward,
        );
        search.dist
    }

    /// Parses the text graph format.
    ///
    /// ```text
    /// # comment
    /// n m directed|undirected
    /// u v length [edge_cost]
    /// ```
    pub fn parse(reader: impl BufRead) -> Result<Graph> {
        let mut graph: Option<Graph> = None;
        let mut expected_edges = 0usize;
        let mut last_line = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            match graph.as_mut() {
                None => {
                    if fields.len() != 3 {
                        return Err(perr("expected header `n m directed|undirected`".into()));
                    }
                    let n = parse_field::<usize>(fields[0], line_no, "vertex count")?;
                    expected_edges = parse_field::<usize>(fields[1], line_no, "edge count")?;
                    let directed = match fields[2] {
                        "directed" => true,
                        "undirected" => false,
                        other => return Err(perr(format!("unknown orientation `{other}`"))),
                    };
                    graph = Some(Graph::new(n, directed));
                }
                Some(g) => {
                    if fields.len() != 3 && fields.len() != 4 {
                        return Err(perr("expected `u v length [edge_cost]`".into()));
                    }
                    if g.edge_count() == expected_edges {
                        return Err(perr(format!(
                            "more than the declared {expected_edges} edges"
                        )));
                    }
                    let u = parse_field::<usize>(fields[0], line_no, "tail")?;
                    let v = parse_field::<usize>(fields[1], line_no, "head")?;
                    let length = parse_field::<f64>(fields[2], line_no, "length")?;
                    let cost = match fields.get(3) {
                        Some(f) => parse_field::<f64>(f, line_no, "edge cost")?,
                        None => 1.0,
                    };
                    g.add_edge_with_cost(u, v, length, cost)
                        .map_err(|e| perr(e.to_string()))?;
                }
            }
        }
        let graph = graph.ok_or(Error::Parse {
            line: last_line,
            msg: "missing header".into(),
        })?;
        if graph.edge_count() != expected_edges {
            return Err(Error::Parse {
                line: last_line,
                msg: format!(
                    "header declares {expected_edges} edges but {} were given",
                    graph.edge_count()
                ),
            });
        }
        Ok(graph)
    }

    /// Reads `v cost` lines into the vertex costs.
    pub fn load_vertex_costs(&mut self, reader: impl BufRead) -> Result<()> {
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `v cost`".into(),
                });
            }
            let v = parse_field::<usize>(fields[0], line_no, "vertex")?;
            let c = parse_field::<f64>(fields[1], line_no, "cost")?;
            self.set_vertex_cost(v, c).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Serializes in the text graph format. Edge costs are written only when
    /// some edge has a non-unit cost. Lengths use the shortest round-trip
    /// decimal form, so parsing the output reproduces identical values.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let with_costs = self.edge_costs.iter().any(|&c| c != 1.0);
        let orientation = if self.directed {
            "directed"
        } else {
            "undirected"
        };
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertex_count(),
            self.edge_count(),
            orientation
        );
        for (e, &(u, v)) in self.endpoints.iter().enumerate() {
            if with_costs {
                let _ = writeln!(s, "{u} {v} {} {}", self.lengths[e], self.edge_costs[e]);
            } else {
                let _ = writeln!(s, "{u} {v} {}", self.lengths[e]);
            }
        }
        s
    }

    /// Vertex costs in the `v cost` format, or `None` if all costs are 1.
    pub fn vertex_costs_text(&self) -> Option<String> {
        if self.vertex_costs.iter().all(|&c| c == 1.0) {
            return None;
        }
        let mut s = String::new();
        for (v, c) in self.vertex_costs.iter().enumerate() {
            let _ = writeln!(s, "{v} {c}");
        }
        Some(s)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} `{field}`"),
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Dijkstra {
    dist: Vec<f64>,
    pred: Vec<Option<(usize, usize)>>,
    done: Vec<bool>,
}

impl Dijkstra {
    fn new(n: usize) -> Self {
        Dijkstra {
            dist: vec![f64::INFINITY; n],
            pred: vec![None; n],
            done: vec![false; n],
        }
    }

    /// Label-setting search; removed elements are filtered at expansion time.
    fn run(
        &mut self,
        g: &Graph,
        source: usize,
        target: Option<usize>,
        mode: ElementMode,
        mask: &[bool],
        dir: Direction,
    ) {
        let vertex_removed = |v: usize| mode == ElementMode::Vertex && mask[v];
        if vertex_removed(source) {
            return;
        }
        let mut heap = BinaryHeap::new();
        self.dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            vertex: source,
        });
        while let Some(HeapEntry { dist, vertex }) = heap.pop() {
            if self.done[vertex] {
                continue;
            }
            self.done[vertex] = true;
            if Some(vertex) == target {
                return;
            }
            let arcs = match dir {
                Direction::Forward => &g.out[vertex],
                Direction::Backward => &g.inc[vertex],
            };
            for arc in arcs {
                if self.done[arc.head] || vertex_removed(arc.head) {
                    continue;
                }
                if mode == ElementMode::Edge && mask[arc.edge] {
                    continue;
                }
                let nd = dist + g.lengths[arc.edge];
                if nd < self.dist[arc.head] {
                    self.dist[arc.head] = nd;
                    self.pred[arc.head] = Some((vertex, arc.edge));
                    heap.push(HeapEntry {
                        dist: nd,
                        vertex: arc.head,
                    });
                }
            }
        }
    }
}
