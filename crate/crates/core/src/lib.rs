//! Minimum-cost vertex and edge sets whose removal pushes the shortest-path
//! distance between target pairs above a threshold `T`.
//!
//! Solvers:
//! - [`approx::gen`]: enumerate all short paths, cover them greedily.
//! - [`approx::fen`]: enumerate, solve the covering LP, round.
//! - [`gest::gest`]: greedy driven by sampled path counts, with an optional
//!   shortest-path fallback.
//! - [`exact::opt`]: branch and bound over the path family.
//! - [`exact::exact_small_t`]: polynomial cases for hop bounds up to 3.
//! - [`baseline::mc`]: classical minimum vertex cut, independent of `T`.

pub mod approx;
pub mod baseline;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod generators;
pub mod gest;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod pathspace;
pub mod seed;
pub mod solution;

pub use approx::{fen, gen};
pub use baseline::{mc, min_vertex_cut};
pub use error::{Error, Result};
pub use exact::{exact_small_t, exact_t2, exact_t3, opt, opt_hitting_set};
pub use gest::{gest, GestConfig};
pub use graph::{ElementMode, Graph, UNREMOVABLE};
pub use instance::{Diagnostic, Limits, PseudocutInstance};
pub use lp::{solve_covering_lp, FractionalSolution};
pub use pathspace::{
    count_paths_through, enumerate_paths, sample_path, CoveringInstance, Path, SampledPath,
};
pub use solution::Solution;
