use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{ElementMode, Graph};

/// Resource limits shared by the solvers.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of enumerated paths before giving up.
    pub max_paths: usize,
    /// Maximum simplex pivots for the covering LP.
    pub max_lp_pivots: usize,
    /// Maximum branch-and-bound nodes for the exact solver.
    pub max_search_nodes: u64,
    /// Wall-clock deadline; solvers poll it and return [`Error::Timeout`].
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_paths: 10_000_000,
            max_lp_pivots: 5_000_000,
            max_search_nodes: 50_000_000,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

/// A structural or feasibility problem found by [`PseudocutInstance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    BadThreshold(f64),
    NoTargets,
    DegeneratePair {
        pair: usize,
    },
    DuplicatePair {
        pair: usize,
    },
    BadLength {
        edge: usize,
        length: f64,
    },
    SelfLoop {
        edge: usize,
    },
    BadCost {
        element: usize,
        cost: f64,
    },
    /// Even removing every removable element leaves the pair within `T`.
    Unseparable {
        pair: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::BadThreshold(t) => write!(f, "threshold must be positive and finite, got {t}"),
            Diagnostic::NoTargets => write!(f, "target set is empty"),
            Diagnostic::DegeneratePair { pair } => write!(f, "target pair {pair} has s = t"),
            Diagnostic::DuplicatePair { pair } => write!(f, "target pair {pair} repeats an earlier pair"),
            Diagnostic::BadLength { edge, length } => {
                write!(f, "edge {edge} has non-positive or non-finite length {length}")
            }
            Diagnostic::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Diagnostic::BadCost { element, cost } => {
                write!(f, "element {element} has invalid cost {cost}")
            }
            Diagnostic::Unseparable { pair } => write!(
                f,
                "target pair {pair} stays within the threshold after removing every removable element"
            ),
        }
    }
}

/// Graph, threshold, target pairs, element mode and forbidden elements.
#[derive(Debug, Clone)]
pub struct PseudocutInstance {
    graph: Arc<Graph>,
    threshold: f64,
    targets: Vec<(usize, usize)>,
    mode: ElementMode,
    forbidden: BTreeSet<usize>,
}

impl PseudocutInstance {
    /// Vertex mode with a single pair forbids removing its endpoints; with
    /// several pairs, endpoints are removable.
    pub fn new(
        graph: Arc<Graph>,
        threshold: f64,
        targets: Vec<(usize, usize)>,
        mode: ElementMode,
    ) -> Result<Self> {
        for &(s, t) in &targets {
            graph.check_vertex(s)?;
            graph.check_vertex(t)?;
        }
        let mut forbidden = BTreeSet::new();
        if mode == ElementMode::Vertex && targets.len() == 1 {
            forbidden.insert(targets[0].0);
            forbidden.insert(targets[0].1);
        }
        Ok(PseudocutInstance {
            graph,
            threshold,
            targets,
            mode,
            forbidden,
        })
    }

    /// Single-pair vertex-mode instance.
    pub fn single(graph: Arc<Graph>, threshold: f64, s: usize, t: usize) -> Result<Self> {
        Self::new(graph, threshold, vec![(s, t)], ElementMode::Vertex)
    }

    pub fn with_forbidden(mut self, extra: impl IntoIterator<Item = usize>) -> Result<Self> {
        let count = self.graph.element_count(self.mode);
        for e in extra {
            if e >= count {
                return Err(Error::InvalidInput(format!(
                    "forbidden {} {e} out of range",
                    self.mode
                )));
            }
            self.forbidden.insert(e);
        }
        Ok(self)
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        PseudocutInstance {
            threshold,
            ..self.clone()
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn targets(&self) -> &[(usize, usize)] {
        &self.targets
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn mode(&self) -> ElementMode {
        self.mode
    }

    pub fn forbidden(&self) -> &BTreeSet<usize> {
        &self.forbidden
    }

    pub fn element_count(&self) -> usize {
        self.graph.element_count(self.mode)
    }

    pub fn cost(&self, element: usize) -> f64 {
        self.graph.element_cost(self.mode, element)
    }

    pub fn cost_of(&self, elements: &[usize]) -> f64 {
        elements
            .iter()
            .map(|&e| self.cost(e))
            .fold(0.0, |a, c| a + c)
    }

    /// Neither forbidden nor carrying the unremovable cost sentinel.
    pub fn is_removable(&self, element: usize) -> bool {
        !self.forbidden.contains(&element) && self.cost(element).is_finite()
    }

    /// `floor(T / q_min)`: the most edges a path of length at most `T` can have.
    pub fn hop_bound(&self) -> usize {
        match self.graph.min_length() {
            Some(q) if q > 0.0 && self.threshold >= 0.0 => (self.threshold / q).floor() as usize,
            _ => 0,
        }
    }

    /// Removal mask for `w`, rejecting ids that may not be removed.
    pub fn removal_mask(&self, w: &[usize]) -> Result<Vec<bool>> {
        let mask = self.graph.removal_mask(self.mode, w)?;
        if let Some(&bad) = w.iter().find(|&&e| !self.is_removable(e)) {
            return Err(Error::Contract(format!(
                "{} {bad} is forbidden or unremovable",
                self.mode
            )));
        }
        Ok(mask)
    }

    /// Indices of pairs whose distance is still at most `T` under `mask`.
    pub fn unseparated_pairs(&self, mask: &[bool]) -> Vec<usize> {
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, &(s, t))| {
                self.graph.distance_masked(s, t, self.mode, mask) <= self.threshold
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// True iff removing `w` pushes every target distance above `T`.
    pub fn is_feasible(&self, w: &[usize]) -> Result<bool> {
        let mask = self.removal_mask(w)?;
        Ok(self
            .targets
            .iter()
            .all(|&(s, t)| self.graph.distance_masked(s, t, self.mode, &mask) > self.threshold))
    }

    /// All elements that a solution may contain.
    pub fn removable_elements(&self) -> Vec<usize> {
        (0..self.element_count())
            .filter(|&e| self.is_removable(e))
            .collect()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Diagnostic>> {
        let mut diags = self.structural_diagnostics();
        if diags.is_empty() {
            let mask: Vec<bool> = (0..self.element_count())
                .map(|e| self.is_removable(e))
                .collect();
            for pair in self.unseparated_pairs(&mask) {
                diags.push(Diagnostic::Unseparable { pair });
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(diags)
        }
    }

    /// Like [`ensure_valid`](Self::ensure_valid) but skips the feasibility check.
    pub fn ensure_valid_structure(&self) -> Result<()> {
        let diags = self.structural_diagnostics();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                diags
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ))
        }
    }

    fn structural_diagnostics(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let g = &*self.graph;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            diags.push(Diagnostic::BadThreshold(self.threshold));
        }
        if self.targets.is_empty() {
            diags.push(Diagnostic::NoTargets);
        }
        let mut seen = BTreeSet::new();
        for (i, &(s, t)) in self.targets.iter().enumerate() {
            if s == t {
                diags.push(Diagnostic::DegeneratePair { pair: i });
            }
            if !seen.insert((s, t)) {
                diags.push(Diagnostic::DuplicatePair { pair: i });
            }
        }
        for e in 0..g.edge_count() {
            let len = g.length(e);
            if !(len > 0.0 && len.is_finite()) {
                diags.push(Diagnostic::BadLength {
                    edge: e,
                    length: len,
                });
            }
            let (u, v) = g.endpoints(e);
            if u == v {
                diags.push(Diagnostic::SelfLoop { edge: e });
            }
        }
        for (e, &c) in g.element_costs(self.mode).iter().enumerate() {
            if c.is_nan() || c <= 0.0 {
                diags.push(Diagnostic::BadCost {
                    element: e,
                    cost: c,
                });
            }
        }
        diags
    }

    /// [`validate`](Self::validate) folded into an error: infeasibility maps to
    /// [`Error::Infeasible`], anything else to [`Error::InvalidInput`].
    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate() {
            Ok(()) => Ok(()),
            Err(diags) => {
                let text = diags
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                if diags
                    .iter()
                    .all(|d| matches!(d, Diagnostic::Unseparable { .. }))
                {
                    Err(Error::Infeasible(text))
                } else {
                    Err(Error::InvalidInput(text))
                }
            }
        }
    }
}
