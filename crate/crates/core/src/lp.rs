//! Fractional covering LP: `min c·w  s.t.  Σ_{i∈p} w_i ≥ 1 for every path p, w ≥ 0`.
//!
//! Solved through its packing dual `max Σ y_p  s.t.  Σ_{p∋i} y_p ≤ c_i, y ≥ 0`,
//! whose all-slack basis is feasible from the start. The primal weights are
//! the simplex multipliers of the final dual basis.
//!
//! Revised simplex with a dense explicit basis inverse. Pricing is Dantzig's
//! rule, falling back to Bland's smallest-index rule whenever a run of
//! degenerate pivots gets long, which rules out cycling.

use crate::error::{Error, Result};
use crate::instance::Limits;
use crate::pathspace::CoveringInstance;

/// Largest tolerated violation of a covering constraint in the returned weights.
pub const RESIDUAL_TOL: f64 = 1e-9;

const PRICE_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK: usize = 32;

/// Optimal weights of the covering LP.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    /// Indexed by element id; elements on no path get 0.
    pub weights: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Solves the covering relaxation of `cov` to optimality.
pub fn solve_covering_lp(cov: &CoveringInstance, limits: &Limits) -> Result<FractionalSolution> {
    let n_elements = cov.element_count();
    if cov.is_empty() {
        return Ok(FractionalSolution {
            weights: vec![0.0; n_elements],
            objective: 0.0,
            pivots: 0,
        });
    }
    cov.ensure_coverable()?;
    let candidates = cov.candidates();
    let mut row_of = vec![usize::MAX; n_elements];
    for (r, &e) in candidates.iter().enumerate() {
        row_of[e] = r;
    }
    let columns: Vec<Vec<usize>> = cov
        .rows()
        .iter()
        .map(|row| row.iter().map(|&e| row_of[e]).collect())
        .collect();
    let rhs: Vec<f64> = candidates.iter().map(|&e| cov.cost(e)).collect();
    if let Some(&bad) = rhs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "covering LP needs positive finite costs, got {bad}"
        )));
    }

    let mut simplex = DualSimplex::new(columns, rhs);
    simplex.run(limits)?;

    let mut weights = vec![0.0; n_elements];
    for (r, &e) in candidates.iter().enumerate() {
        weights[e] = simplex.pi[r].clamp(0.0, 1.0);
    }
    let objective = candidates.iter().map(|&e| cov.cost(e) * weights[e]).sum();
    if let Some(p) = (0..cov.len())
        .find(|&p| cov.row(p).iter().map(|&e| weights[e]).sum::<f64>() < 1.0 - RESIDUAL_TOL)
    {
        return Err(Error::budget(
            "LP precision",
            format!("constraint {p} violated beyond tolerance after optimization"),
        ));
    }
    Ok(FractionalSolution {
        weights,
        objective,
        pivots: simplex.pivots,
    })
}

/// Packing LP in equality form: columns `0..P` are path variables (objective 1),
/// columns `P..P+m` are slacks (objective 0).
struct DualSimplex {
    m: usize,
    paths: Vec<Vec<usize>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    x: Vec<f64>,
    pi: Vec<f64>,
    pivots: usize,
}

impl DualSimplex {
    fn new(paths: Vec<Vec<usize>>, rhs: Vec<f64>) -> Self {
        let m = rhs.len();
        let p = paths.len();
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut in_basis = vec![false; p + m];
        for r in 0..m {
            in_basis[p + r] = true;
        }
        DualSimplex {
            m,
            basis: (p..p + m).collect(),
            in_basis,
            binv,
            x: rhs.clone(),
            pi: vec![0.0; m],
            paths,
            rhs,
            pivots: 0,
        }
    }

    fn column_count(&self) -> usize {
        self.paths.len() + self.m
    }

    fn compute_pi(&mut self) {
        let m = self.m;
        self.pi.iter_mut().for_each(|v| *v = 0.0);
        for (r, &col) in self.basis.iter().enumerate() {
            if col < self.paths.len() {
                let row = &self.binv[r * m..(r + 1) * m];
                for (p, b) in self.pi.iter_mut().zip(row) {
                    *p += b;
                }
            }
        }
    }

    fn reduced_cost(&self, col: usize) -> f64 {
        if col < self.paths.len() {
            1.0 - self.paths[col].iter().map(|&r| self.pi[r]).sum::<f64>()
        } else {
            -self.pi[col - self.paths.len()]
        }
    }

    fn direction(&self, col: usize) -> Vec<f64> {
        let m = self.m;
        let mut d = vec![0.0; m];
        if col < self.paths.len() {
            for (r, dr) in d.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *dr = self.paths[col].iter().map(|&i| row[i]).sum();
            }
        } else {
            let i = col - self.paths.len();
            for (r, dr) in d.iter_mut().enumerate() {
                *dr = self.binv[r * m + i];
            }
        }
        d
    }

    fn choose_entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for col in 0..self.column_count() {
            if self.in_basis[col] {
                continue;
            }
            let rc = self.reduced_cost(col);
            if rc <= PRICE_TOL {
                continue;
            }
            if bland {
                return Some(col);
            }
            if best.is_none_or(|(_, b)| rc > b) {
                best = Some((col, rc));
            }
        }
        best.map(|(c, _)| c)
    }

    fn choose_leaving(&self, d: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (r, &dr) in d.iter().enumerate() {
            if dr <= PIVOT_TOL {
                continue;
            }
            let ratio = self.x[r].max(0.0) / dr;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    let better = if tie {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            dr > d[br]
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize, d: &[f64]) {
        let m = self.m;
        let piv = d[row];
        let theta = self.x[row].max(0.0) / piv;
        for v in &mut self.binv[row * m..(row + 1) * m] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = self.binv[row * m..(row + 1) * m].to_vec();
        for (r, &f) in d.iter().enumerate().take(m) {
            if r == row || f == 0.0 {
                continue;
            }
            for (v, pv) in self.binv[r * m..(r + 1) * m].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.x[r] -= theta * f;
        }
        self.x[row] = theta;
        self.in_basis[self.basis[row]] = false;
        self.in_basis[col] = true;
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Rebuilds the basis inverse and basic values from scratch.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (c, &col) in self.basis.iter().enumerate() {
            if col < self.paths.len() {
                for &r in &self.paths[col] {
                    b[r * m + c] = 1.0;
                }
            } else {
                b[(col - self.paths.len()) * m + c] = 1.0;
            }
        }
        let inv = invert(m, b).ok_or_else(|| {
            Error::budget("LP precision", "singular basis during refactorization")
        })?;
        self.binv = inv;
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[r] = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    fn run(&mut self, limits: &Limits) -> Result<()> {
        let mut streak = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.pivots >= limits.max_lp_pivots {
                return Err(Error::budget(
                    "LP pivot",
                    format!("no optimum after {} pivots", self.pivots),
                ));
            }
            if self.pivots % 256 == 255 {
                limits.check_deadline()?;
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            self.compute_pi();
            let bland = streak >= DEGENERATE_STREAK;
            let Some(col) = self.choose_entering(bland) else {
                if since_refactor == 0 {
                    return Ok(());
                }
                // Confirm optimality on a fresh factorization.
                self.refactor()?;
                since_refactor = 0;
                self.compute_pi();
                if self.choose_entering(true).is_none() {
                    return Ok(());
                }
                continue;
            };
            let d = self.direction(col);
            let Some(row) = self.choose_leaving(&d, bland) else {
                // Packing LP with positive capacities is bounded; only an empty
                // column could get here, and those are rejected up front.
                return Err(Error::Infeasible(
                    "covering LP has an uncoverable path".into(),
                ));
            };
            let degenerate = self.x[row] <= 1e-12;
            self.pivot(row, col, &d);
            since_refactor += 1;
            streak = if degenerate { streak + 1 } else { 0 };
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting of a dense row-major matrix.
fn invert(m: usize, mut a: Vec<f64>) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))?;
        if a[p * m + c].abs() < 1e-12 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let piv = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= piv;
            inv[c * m + k] /= piv;
        }
        for r in 0..m {
            if r == c {
                continue;
            }
            let f = a[r * m + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[c * m + k];
                inv[r * m + k] -= f * inv[c * m + k];
            }
        }
    }
    Some(inv)
}
