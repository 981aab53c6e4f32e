//! Topology generators, fixed instances and target-pair selection.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::instance::PseudocutInstance;

/// How edge lengths are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Continuous uniform on [1, 10].
    #[default]
    Uniform,
    /// Integers 1..=10.
    Integer,
    Unit,
}

impl WeightMode {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            WeightMode::Uniform => rng.gen_range(1.0..=10.0),
            WeightMode::Integer => rng.gen_range(1..=10) as f64,
            WeightMode::Unit => 1.0,
        }
    }
}

/// Directed 13-vertex example with target pair (0, 12) and T = 5.
pub fn gen_fig1() -> (Arc<Graph>, PseudocutInstance) {
    const ARCS: [(usize, usize); 16] = [
        (0, 1),
        (0, 3),
        (0, 5),
        (1, 2),
        (2, 7),
        (3, 4),
        (4, 6),
        (5, 6),
        (5, 8),
        (6, 7),
        (6, 9),
        (7, 12),
        (8, 10),
        (9, 11),
        (10, 12),
        (11, 12),
    ];
    let mut g = Graph::new(13, true);
    for (u, v) in ARCS {
        g.add_edge(u, v, 1.0).expect("fixed arc list is valid");
    }
    let g = Arc::new(g);
    let inst = PseudocutInstance::single(g.clone(), 5.0, 0, 12).expect("fixed instance is valid");
    (g, inst)
}

/// Vertex ids of the tightness gadget for a given `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TightnessLayout {
    pub k: usize,
}

impl TightnessLayout {
    pub fn s(&self) -> usize {
        0
    }
    /// `g_i` for `i` in `1..=k`.
    pub fn g(&self, i: usize) -> usize {
        i
    }
    pub fn o1(&self) -> usize {
        self.k + 1
    }
    pub fn o2(&self) -> usize {
        self.k + 2
    }
    pub fn t(&self) -> usize {
        self.k + 3
    }
    pub fn vertex_count(&self) -> usize {
        4 + self.k + 2 * ((1usize << self.k) - 1)
    }
}

/// Greedy worst case: `s → g_i` for every `i`, `2^(i-1)` disjoint two-hop
/// paths from `g_i` to each of `o_1` and `o_2`, then `o_1, o_2 → t`.
/// Unit lengths, single pair `(s, t)`, T = 5.
///
/// # Panics
/// If `k` is 0 or too large to index.
pub fn gen_tightness(k: usize) -> (Arc<Graph>, PseudocutInstance) {
    assert!((1..=24).contains(&k), "k must lie in 1..=24");
    let lay = TightnessLayout { k };
    let mut g = Graph::new(lay.vertex_count(), true);
    let mut next = lay.t() + 1;
    let arc = |g: &mut Graph, u, v| {
        g.add_edge(u, v, 1.0).expect("gadget arcs are valid");
    };
    for i in 1..=k {
        arc(&mut g, lay.s(), lay.g(i));
    }
    for i in 1..=k {
        for o in [lay.o1(), lay.o2()] {
            for _ in 0..1usize << (i - 1) {
                arc(&mut g, lay.g(i), next);
                arc(&mut g, next, o);
                next += 1;
            }
        }
    }
    arc(&mut g, lay.o1(), lay.t());
    arc(&mut g, lay.o2(), lay.t());
    debug_assert_eq!(next, lay.vertex_count());
    let g = Arc::new(g);
    let inst =
        PseudocutInstance::single(g.clone(), 5.0, lay.s(), lay.t()).expect("gadget is valid");
    (g, inst)
}

/// Uniform random simple undirected graph with exactly `m` edges.
pub fn gen_er(n: usize, m: usize, weights: WeightMode, seed: u64) -> Result<Graph> {
    let total = n * n.saturating_sub(1) / 2;
    if m > total {
        return Err(Error::InvalidInput(format!(
            "{m} edges requested, at most {total} fit on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, total, m).into_vec();
    picks.sort_unstable();
    let mut g = Graph::new(n, false);
    let (mut u, mut row_start) = (0usize, 0usize);
    for idx in picks {
        while idx >= row_start + (n - 1 - u) {
            row_start += n - 1 - u;
            u += 1;
        }
        let v = u + 1 + (idx - row_start);
        g.add_edge(u, v, weights.draw(&mut rng))?;
    }
    Ok(g)
}

/// Parameters of the Waxman model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaxmanParams {
    pub n: usize,
    pub m_target: usize,
    pub alpha: f64,
    pub beta: f64,
    pub weights: WeightMode,
}

impl WaxmanParams {
    pub fn new(n: usize, m_target: usize) -> Self {
        WaxmanParams {
            n,
            m_target,
            alpha: 0.15,
            beta: 0.2,
            weights: WeightMode::Uniform,
        }
    }
}

/// Waxman graph on points in the unit square: random pairs are accepted with
/// probability `beta * exp(-dist / (alpha * dist_max))` until `m_target` edges
/// exist; remaining components are joined by nearest-pair edges.
pub fn gen_waxman(p: &WaxmanParams, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, _) = waxman_with_points(p, &mut rng)?;
    Ok(g)
}

fn waxman_with_points<R: Rng + ?Sized>(
    p: &WaxmanParams,
    rng: &mut R,
) -> Result<(Graph, Vec<(f64, f64)>)> {
    let n = p.n;
    let valid = p.alpha > 0.0 && p.beta > 0.0 && p.beta <= 1.0;
    if !valid {
        return Err(Error::InvalidInput(format!(
            "Waxman parameters need alpha > 0 and beta in (0, 1], got {} and {}",
            p.alpha, p.beta
        )));
    }
    let total = n * n.saturating_sub(1) / 2;
    if p.m_target > total {
        return Err(Error::InvalidInput(format!(
            "{} edges requested, at most {total} fit on {n} vertices",
            p.m_target
        )));
    }
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let dist =
        |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let mut dist_max = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            dist_max = dist_max.max(dist(a, b));
        }
    }
    let scale = p.alpha * dist_max.max(f64::MIN_POSITIVE);

    let mut g = Graph::new(n, false);
    let mut present = BTreeSet::new();
    while present.len() < p.m_target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let key = (a.min(b), a.max(b));
        if a == b || present.contains(&key) {
            continue;
        }
        if rng.gen::<f64>() < p.beta * (-dist(a, b) / scale).exp() {
            present.insert(key);
        }
    }
    for &(a, b) in &present {
        g.add_edge(a, b, p.weights.draw(rng))?;
    }
    connect_components(&mut g, &dist, p.weights, rng)?;
    Ok((g, pts))
}

/// Grows the component of vertex 0 by repeatedly attaching the outside vertex
/// closest to it, absorbing that vertex's whole component each time.
fn connect_components<R: Rng + ?Sized>(
    g: &mut Graph,
    dist: &dyn Fn(usize, usize) -> f64,
    weights: WeightMode,
    rng: &mut R,
) -> Result<()> {
    let n = g.vertex_count();
    if n == 0 {
        return Ok(());
    }
    let comp = components(g);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        members[comp[v]].push(v);
    }
    let mut inside = vec![false; n];
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    let absorb = |c: usize, inside: &mut [bool], best: &mut [(f64, usize)]| {
        for &w in &members[c] {
            inside[w] = true;
        }
        for &w in &members[c] {
            for x in 0..n {
                if !inside[x] {
                    let d = dist(w, x);
                    if d < best[x].0 {
                        best[x] = (d, w);
                    }
                }
            }
        }
    };
    absorb(comp[0], &mut inside, &mut best);
    loop {
        let pick = (0..n)
            .filter(|&x| !inside[x])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(a.cmp(&b)));
        let Some(x) = pick else { break };
        g.add_edge(best[x].1, x, weights.draw(rng))?;
        absorb(comp[x], &mut inside, &mut best);
    }
    Ok(())
}

/// Component label per vertex (labels are the smallest member id).
pub fn components(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        label[root] = root;
        stack.push(root);
        while let Some(u) = stack.pop() {
            let next = g.out_arcs(u).iter().chain(g.in_arcs(u)).map(|a| a.head);
            for v in next.collect::<Vec<_>>() {
                if label[v] == usize::MAX {
                    label[v] = root;
                    stack.push(v);
                }
            }
        }
    }
    label
}

/// Two-level topology: a Waxman graph of domains, each domain expanded into
/// its own Waxman graph, and every domain-level edge realized between random
/// members of the two domains.
pub fn gen_hierarchical(
    domains: &WaxmanParams,
    routers: &WaxmanParams,
    seed: u64,
) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (top, _) = waxman_with_points(domains, &mut rng)?;
    let per = routers.n;
    let mut g = Graph::new(domains.n * per, false);
    for d in 0..domains.n {
        let (sub, _) = waxman_with_points(routers, &mut rng)?;
        for e in 0..sub.edge_count() {
            let (a, b) = sub.endpoints(e);
            g.add_edge(d * per + a, d * per + b, sub.length(e))?;
        }
    }
    if per > 0 {
        for e in 0..top.edge_count() {
            let (a, b) = top.endpoints(e);
            let ra = a * per + rng.gen_range(0..per);
            let rb = b * per + rng.gen_range(0..per);
            g.add_edge(ra, rb, routers.weights.draw(&mut rng))?;
        }
    }
    Ok(g)
}

/// Target-pair selection scheme by degree class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    RR,
    HH,
    HL,
    LL,
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RR" => Ok(SchemeKind::RR),
            "HH" => Ok(SchemeKind::HH),
            "HL" => Ok(SchemeKind::HL),
            "LL" => Ok(SchemeKind::LL),
            other => Err(Error::InvalidInput(format!(
                "unknown target scheme '{other}'"
            ))),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeKind::RR => "RR",
            SchemeKind::HH => "HH",
            SchemeKind::HL => "HL",
            SchemeKind::LL => "LL",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetScheme {
    pub kind: SchemeKind,
    pub zeta: f64,
    pub k: usize,
    pub seed: u64,
}

/// High- and low-degree classes: `deg >= zeta * max_deg` and `deg <= (1 - zeta) * max_deg`.
pub fn degree_classes(g: &Graph, zeta: f64) -> (Vec<usize>, Vec<usize>) {
    let delta = g.max_degree() as f64;
    let n = g.vertex_count();
    let high = (0..n)
        .filter(|&v| g.degree(v) as f64 >= zeta * delta)
        .collect();
    let low = (0..n)
        .filter(|&v| g.degree(v) as f64 <= (1.0 - zeta) * delta)
        .collect();
    (high, low)
}

/// Draws `k` distinct ordered pairs `(s, t)`, `s != t`, with `s` and `t` from the
/// classes the scheme names.
pub fn gen_targets(g: &Graph, scheme: &TargetScheme) -> Result<Vec<(usize, usize)>> {
    if scheme.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let (sources, sinks) = if scheme.kind == SchemeKind::RR {
        (all.clone(), all)
    } else {
        if !(scheme.zeta > 0.0 && scheme.zeta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "zeta must lie in (0, 1), got {}",
                scheme.zeta
            )));
        }
        let (high, low) = degree_classes(g, scheme.zeta);
        let (a, b) = match scheme.kind {
            SchemeKind::HH => (high.clone(), high),
            SchemeKind::HL => (high, low),
            SchemeKind::LL => (low.clone(), low),
            SchemeKind::RR => unreachable!(),
        };
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput(format!(
                "degree class for {} is empty at zeta = {}",
                scheme.kind, scheme.zeta
            )));
        }
        (a, b)
    };
    let in_sinks: BTreeSet<usize> = sinks.iter().copied().collect();
    let overlap = sources.iter().filter(|v| in_sinks.contains(v)).count();
    let available = sources.len() * sinks.len() - overlap;
    if scheme.k > available {
        return Err(Error::InvalidInput(format!(
            "{} pairs requested but only {available} distinct pairs exist for {}",
            scheme.k, scheme.kind
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scheme.seed);
    if 2 * scheme.k > available {
        let pairs: Vec<(usize, usize)> = sources
            .iter()
            .flat_map(|&s| sinks.iter().filter(move |&&t| t != s).map(move |&t| (s, t)))
            .collect();
        return Ok(index::sample(&mut rng, pairs.len(), scheme.k)
            .into_iter()
            .map(|i| pairs[i])
            .collect());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(scheme.k);
    while out.len() < scheme.k {
        let s = sources[rng.gen_range(0..sources.len())];
        let t = sinks[rng.gen_range(0..sinks.len())];
        if s != t && seen.insert((s, t)) {
            out.push((s, t));
        }
    }
    Ok(out)
}

/// Reads `s t` lines; `#` starts a comment.
pub fn read_targets(reader: impl BufRead) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad vertex id '{s}'"),
            })
        };
        match fields.as_slice() {
            [s, t] => out.push((parse(s)?, parse(t)?)),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 's t', got '{body}'"),
                })
            }
        }
    }
    Ok(out)
}

pub fn targets_text(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(s, t)| format!("{s} {t}\n")).collect()
}
