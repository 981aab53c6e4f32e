use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::PseudocutInstance;

/// A set of removed elements together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub algorithm: String,
    /// Sorted, duplicate-free element ids (vertices or edges per the instance mode).
    pub elements: Vec<usize>,
    pub cost: f64,
    pub feasible: bool,
    pub seed: Option<u64>,
    pub elapsed_ms: u64,
}

impl Solution {
    /// Packages `elements` for `inst`, computing cost and checking feasibility.
    pub(crate) fn build(
        inst: &PseudocutInstance,
        algorithm: &str,
        mut elements: Vec<usize>,
        seed: Option<u64>,
        started: Instant,
    ) -> Result<Solution> {
        elements.sort_unstable();
        elements.dedup();
        let cost = inst.cost_of(&elements);
        let feasible = inst.is_feasible(&elements)?;
        Ok(Solution {
            algorithm: algorithm.to_string(),
            elements,
            cost,
            feasible,
            seed,
            elapsed_ms: started.elapsed().as_millis() as u64,
        })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }
}
