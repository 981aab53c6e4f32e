//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use pseudocut::generators::{gen_er, gen_targets, SchemeKind, TargetScheme, WeightMode};
use pseudocut::PseudocutInstance;

/// Unit-length ER graph with `k` random pairs and threshold `t`.
pub fn er_instance(n: usize, m: usize, k: usize, t: f64, seed: u64) -> PseudocutInstance {
    let g = Arc::new(gen_er(n, m, WeightMode::Unit, seed).expect("valid ER parameters"));
    let pairs = gen_targets(
        &g,
        &TargetScheme {
            kind: SchemeKind::RR,
            zeta: 0.5,
            k,
            seed,
        },
    )
    .expect("enough vertices");
    PseudocutInstance::new(g, t, pairs, pseudocut::ElementMode::Vertex).expect("valid instance")
}
