//! Enumeration-based approximations: greedy covering (GEN) and LP rounding (FEN).

use std::time::Instant;

use crate::error::Result;
use crate::instance::{Limits, PseudocutInstance};
use crate::lp::{solve_covering_lp, FractionalSolution};
use crate::pathspace::{enumerate_paths, CoveringInstance};
use crate::solution::Solution;

/// Slack absorbed by the rounding threshold to tolerate LP round-off.
pub const ROUNDING_SLACK: f64 = 1e-9;

/// Greedy covering: repeatedly takes the element with the most uncovered paths
/// per unit cost until every path is hit. Ties go to the lowest element id.
///
/// Returns the chosen elements in selection order.
pub fn greedy_cover(cov: &CoveringInstance) -> Result<Vec<usize>> {
    cov.ensure_coverable()?;
    let mut uncovered: Vec<usize> = (0..cov.element_count())
        .map(|e| cov.covers(e).len())
        .collect();
    let mut covered = vec![false; cov.len()];
    let mut remaining = cov.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, f64)> = None;
        for (e, &count) in uncovered.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let ratio = count as f64 / cov.cost(e);
            if best.is_none_or(|(_, b)| ratio > b) {
                best = Some((e, ratio));
            }
        }
        let (pick, _) = best.expect("an uncovered path has a removable element");
        chosen.push(pick);
        for &p in cov.covers(pick) {
            if covered[p] {
                continue;
            }
            covered[p] = true;
            remaining -= 1;
            for &e in cov.row(p) {
                uncovered[e] -= 1;
            }
        }
    }
    Ok(chosen)
}

/// Keeps every element whose fractional weight reaches `1 / (hop_bound + 1)`.
pub fn round_fractional(frac: &FractionalSolution, hop_bound: usize) -> Vec<usize> {
    let threshold = 1.0 / (hop_bound as f64 + 1.0) - ROUNDING_SLACK;
    frac.weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0 && w >= threshold)
        .map(|(e, _)| e)
        .collect()
}

/// GEN: enumerate all short paths, then cover them greedily.
pub fn gen(inst: &PseudocutInstance, limits: &Limits) -> Result<Solution> {
    let started = Instant::now();
    inst.ensure_valid()?;
    let cov = enumerate_paths(inst, limits)?;
    let chosen = greedy_cover(&cov)?;
    Solution::build(inst, "GEN", chosen, None, started)
}

/// FEN: enumerate, solve the covering LP, round at `1 / (T0 + 1)`.
pub fn fen(inst: &PseudocutInstance, limits: &Limits) -> Result<Solution> {
    Ok(fen_detailed(inst, limits)?.0)
}

/// FEN together with the LP optimum it rounded.
pub fn fen_detailed(
    inst: &PseudocutInstance,
    limits: &Limits,
) -> Result<(Solution, FractionalSolution)> {
    let started = Instant::now();
    inst.ensure_valid()?;
    let cov = enumerate_paths(inst, limits)?;
    let frac = solve_covering_lp(&cov, limits)?;
    let chosen = round_fractional(&frac, inst.hop_bound());
    let sol = Solution::build(inst, "FEN", chosen, None, started)?;
    Ok((sol, frac))
}
