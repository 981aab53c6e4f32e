//! GEST: greedy selection driven by Monte Carlo estimates of how many short
//! paths each element lies on, and its shortest-path fallback (GESTA).
//!
//! Samples are drawn on the residual graph (current solution removed). A
//! residual walk can never touch the current solution, so the indicator in the
//! estimator reduces to "walk hit the target and contains the candidate"; the
//! credit for paths through the current solution is the same for every
//! candidate and does not change the argmax.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ElementMode;
use crate::instance::{Limits, PseudocutInstance};
use crate::pathspace::{PathSampler, SampledPath};
use crate::seed::mix_seed;
use crate::solution::Solution;

#[derive(Debug, Clone, PartialEq)]
pub struct GestConfig {
    /// Accuracy parameter in (0, 1).
    pub alpha: f64,
    pub seed: u64,
    /// Cap on loop iterations, including iterations that add nothing.
    pub max_iterations: usize,
    /// Enable the shortest-path fallback (GESTA).
    pub fallback: bool,
    /// Replace the computed per-pair sample count. Lowering it voids the
    /// concentration guarantee.
    pub samples_override: Option<usize>,
}

impl Default for GestConfig {
    fn default() -> Self {
        GestConfig {
            alpha: 0.5,
            seed: 0,
            max_iterations: 10_000,
            fallback: true,
            samples_override: None,
        }
    }
}

impl GestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.samples_override == Some(0) {
            return Err(Error::InvalidInput(
                "sample count override must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-pair sample count `ceil(3 k² ln(2 n²) / (2 α²))`, at least 1.
pub fn sample_count(k: usize, n: usize, alpha: f64) -> usize {
    let k = k as f64;
    let n = (n.max(1)) as f64;
    let l = 3.0 * k * k * (2.0 * n * n).ln() / (2.0 * alpha * alpha);
    (l.ceil() as usize).max(1)
}

/// Estimate of the number of target-pair paths that meet `set`:
/// the mean of `I(hit and q ∩ set ≠ ∅) / h(q)` over `samples`.
pub fn sigma(samples: &[SampledPath], set: &[usize], mode: ElementMode) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let total: f64 = samples
        .iter()
        .filter(|q| q.hit && q.elements(mode).iter().any(|e| set.contains(e)))
        .map(|q| q.inv_probability)
        .fold(0.0, |a, c| a + c);
    total / samples.len() as f64
}

/// Running state of the estimator loop.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    /// Accumulated estimates `x_i`, indexed by element id.
    pub scores: Vec<f64>,
    pub samples_used: u64,
    /// Pairs still within the threshold.
    pub pairs_active: Vec<usize>,
}

/// Runs GEST (fallback off) or GESTA (fallback on).
pub fn gest(inst: &PseudocutInstance, cfg: &GestConfig, limits: &Limits) -> Result<Solution> {
    let started = Instant::now();
    cfg.validate()?;
    inst.ensure_valid()?;
    let g = inst.graph();
    let samples = cfg
        .samples_override
        .unwrap_or_else(|| sample_count(inst.k(), g.vertex_count(), cfg.alpha));
    let mut fallback_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, &[0xFA11_BAC4]));
    let mut chosen: Vec<usize> = Vec::new();
    let mut mask = vec![false; inst.element_count()];
    let mut iteration = 0usize;
    let label = if cfg.fallback { "GESTA" } else { "GEST" };

    loop {
        let active = inst.unseparated_pairs(&mask);
        if active.is_empty() {
            break;
        }
        if iteration >= cfg.max_iterations {
            return Err(Error::Budget {
                resource: "GEST iteration",
                detail: format!(
                    "{} iterations without separating every pair",
                    cfg.max_iterations
                ),
                incumbent: None,
            });
        }
        limits.check_deadline()?;
        let state = estimate_scores(inst, &mask, &active, samples, cfg.seed, iteration);
        iteration += 1;

        let mut best: Option<(usize, f64)> = None;
        for (e, &x) in state.scores.iter().enumerate() {
            if x <= 0.0 || mask[e] || !inst.is_removable(e) {
                continue;
            }
            let ratio = x / inst.cost(e);
            if best.is_none_or(|(_, b)| ratio > b) {
                best = Some((e, ratio));
            }
        }
        let pick = match best {
            Some((e, _)) => e,
            None if cfg.fallback => gesta_fallback(inst, &chosen, &mut fallback_rng)?,
            None => continue,
        };
        mask[pick] = true;
        chosen.push(pick);
    }
    Solution::build(inst, label, chosen, Some(cfg.seed), started)
}

/// Draws `samples` residual walks for every active pair and accumulates
/// `x_i = Σ_pairs σ_uv(W ∪ {i})`.
///
/// Each pair gets its own stream seeded from `(seed, iteration, pair)`, and the
/// reduction runs in pair order, so the result does not depend on threading.
pub fn estimate_scores(
    inst: &PseudocutInstance,
    mask: &[bool],
    active: &[usize],
    samples: usize,
    seed: u64,
    iteration: usize,
) -> EstimatorState {
    let g = inst.graph();
    let mode = inst.mode();
    let per_pair: Vec<Vec<f64>> = active
        .par_iter()
        .map(|&pair| {
            let (u, v) = inst.targets()[pair];
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(seed, &[iteration as u64, pair as u64]));
            let mut sampler = PathSampler::new(g.vertex_count());
            let mut acc = vec![0.0; mask.len()];
            for _ in 0..samples {
                let q = sampler.sample(g, u, v, inst.threshold(), mode, mask, &mut rng);
                if q.hit {
                    for &e in q.elements(mode) {
                        acc[e] += q.inv_probability;
                    }
                }
            }
            acc
        })
        .collect();
    let mut scores = vec![0.0; mask.len()];
    for acc in per_pair {
        for (s, a) in scores.iter_mut().zip(acc) {
            *s += a / samples as f64;
        }
    }
    EstimatorState {
        scores,
        samples_used: (samples * active.len()) as u64,
        pairs_active: active.to_vec(),
    }
}

/// Picks the cheapest removable element on a shortest path of a uniformly
/// chosen unseparated pair (ties to the lowest id).
pub fn gesta_fallback<R: Rng + ?Sized>(
    inst: &PseudocutInstance,
    current: &[usize],
    rng: &mut R,
) -> Result<usize> {
    let mask = inst.removal_mask(current)?;
    let active = inst.unseparated_pairs(&mask);
    if active.is_empty() {
        return Err(Error::InvalidInput(
            "every pair is already separated".into(),
        ));
    }
    let pair = active[rng.gen_range(0..active.len())];
    let (s, t) = inst.targets()[pair];
    let (vertices, edges) = inst
        .graph()
        .shortest_path_masked(s, t, inst.mode(), &mask)
        .expect("unseparated pair has a path");
    let on_path = match inst.mode() {
        ElementMode::Vertex => vertices,
        ElementMode::Edge => edges,
    };
    on_path
        .into_iter()
        .filter(|&e| inst.is_removable(e))
        .min_by(|&a, &b| inst.cost(a).total_cmp(&inst.cost(b)).then(a.cmp(&b)))
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "shortest path of pair {pair} ({s}, {t}) has only forbidden elements"
            ))
        })
}
