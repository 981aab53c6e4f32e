//! Experiment runner: sweeps one parameter, averages over random target draws,
//! and writes per-run and summary CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{fen, gen};
use crate::baseline::mc;
use crate::error::{Error, Result};
use crate::exact::{exact_small_t, opt};
use crate::generators::{
    gen_er, gen_targets, gen_waxman, SchemeKind, TargetScheme, WaxmanParams, WeightMode,
};
use crate::gest::{gest, GestConfig};
use crate::graph::{ElementMode, Graph};
use crate::instance::{Limits, PseudocutInstance};
use crate::seed::{mix_seed, tag};
use crate::solution::Solution;

/// Column order of the per-run CSV.
pub const RUN_COLUMNS: [&str; 11] = [
    "algorithm",
    "k",
    "T",
    "zeta",
    "scheme",
    "draw",
    "cost",
    "size",
    "feasible",
    "elapsed_ms",
    "status",
];

/// Column order of the summary CSV.
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "algorithm",
    "k",
    "T",
    "zeta",
    "scheme",
    "runs",
    "ok",
    "mean_cost",
    "std_cost",
    "mean_size",
    "std_size",
    "mean_elapsed_ms",
];

const TARGETS_TAG: u64 = 0x7A26_E75E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    Gen,
    Fen,
    Gest,
    Gesta,
    Opt,
    Mc,
    T3Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Gen,
        Algorithm::Fen,
        Algorithm::Gest,
        Algorithm::Gesta,
        Algorithm::Opt,
        Algorithm::Mc,
        Algorithm::T3Exact,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Gen => "GEN",
            Algorithm::Fen => "FEN",
            Algorithm::Gest => "GEST",
            Algorithm::Gesta => "GESTA",
            Algorithm::Opt => "OPT",
            Algorithm::Mc => "MC",
            Algorithm::T3Exact => "T3-EXACT",
        }
    }

    /// Runs this algorithm on `inst`. `gest_cfg` is used by the sampling solvers.
    pub fn solve(
        self,
        inst: &PseudocutInstance,
        gest_cfg: &GestConfig,
        limits: &Limits,
    ) -> Result<Solution> {
        match self {
            Algorithm::Gen => gen(inst, limits),
            Algorithm::Fen => fen(inst, limits),
            Algorithm::Gest => gest(
                inst,
                &GestConfig {
                    fallback: false,
                    ..gest_cfg.clone()
                },
                limits,
            ),
            Algorithm::Gesta => gest(
                inst,
                &GestConfig {
                    fallback: true,
                    ..gest_cfg.clone()
                },
                limits,
            ),
            Algorithm::Opt => opt(inst, limits),
            Algorithm::Mc => mc(inst),
            Algorithm::T3Exact => exact_small_t(inst),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.label() == up || (up == "T3EXACT" && *a == Algorithm::T3Exact))
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    K,
    T,
    Zeta,
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "K" => Ok(SweepVar::K),
            "T" | "t" => Ok(SweepVar::T),
            "zeta" => Ok(SweepVar::Zeta),
            other => Err(Error::InvalidInput(format!(
                "unknown sweep variable '{other}'"
            ))),
        }
    }
}

/// One setting of the swept parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub t: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone)]
pub enum GraphSource {
    Loaded(Arc<Graph>),
    Er {
        n: usize,
        m: usize,
        weights: WeightMode,
        seed: u64,
    },
    Waxman {
        params: WaxmanParams,
        seed: u64,
    },
}

impl GraphSource {
    pub fn resolve(&self) -> Result<Arc<Graph>> {
        match self {
            GraphSource::Loaded(g) => Ok(g.clone()),
            GraphSource::Er {
                n,
                m,
                weights,
                seed,
            } => Ok(Arc::new(gen_er(*n, *m, *weights, *seed)?)),
            GraphSource::Waxman { params, seed } => Ok(Arc::new(gen_waxman(params, *seed)?)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub mode: ElementMode,
    pub algorithms: Vec<Algorithm>,
    pub scheme: SchemeKind,
    /// Values of the parameters that are not swept.
    pub base: SweepPoint,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    /// Random target-set draws per sweep point.
    pub draws: usize,
    pub master_seed: u64,
    /// Use these pairs for every draw instead of sampling.
    pub fixed_targets: Option<Vec<(usize, usize)>>,
    pub time_budget: Duration,
    pub limits: Limits,
    /// Seed is replaced per run.
    pub gest: GestConfig,
    /// Write measured times; when off, `elapsed_ms` is 0 so output is byte-stable.
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn new(graph: GraphSource, algorithms: Vec<Algorithm>, base: SweepPoint) -> Self {
        ExperimentSpec {
            graph,
            mode: ElementMode::Vertex,
            algorithms,
            scheme: SchemeKind::RR,
            base,
            sweep: SweepVar::T,
            values: vec![base.t],
            draws: 10,
            master_seed: 0,
            fixed_targets: None,
            time_budget: Duration::from_secs(60),
            limits: Limits::default(),
            gest: GestConfig::default(),
            record_timing: true,
        }
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        self.values
            .iter()
            .map(|&v| {
                let mut p = self.base;
                match self.sweep {
                    SweepVar::K => p.k = v as usize,
                    SweepVar::T => p.t = v,
                    SweepVar::Zeta => p.zeta = v,
                }
                if let Some(fixed) = &self.fixed_targets {
                    p.k = fixed.len();
                }
                p
            })
            .collect()
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.draws == 0 {
            return bad("at least one target draw is required".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms listed".into());
        }
        if self.values.is_empty() {
            return bad("sweep has no values".into());
        }
        if self.sweep == SweepVar::K && self.values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return bad("k values must be positive integers".into());
        }
        let points = self.points();
        if self.algorithms.contains(&Algorithm::Mc) && points.iter().any(|p| p.k != 1) {
            return bad("MC needs k = 1 at every sweep point".into());
        }
        if self.algorithms.contains(&Algorithm::T3Exact) {
            let q = g.min_length().unwrap_or(1.0);
            if g.lengths().iter().any(|&d| d != q) {
                return bad("T3-EXACT needs uniform edge lengths".into());
            }
            if points.iter().any(|p| (p.t / q).floor() > 3.0 || p.k != 1) {
                return bad("T3-EXACT needs k = 1 and floor(T / q) <= 3".into());
            }
        }
        self.gest.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Timeout,
    BudgetExceeded,
    /// The drawn targets cannot be separated.
    Infeasible,
    /// The solver rejected the instance.
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::BudgetExceeded => "budget_exceeded",
            RunStatus::Infeasible => "infeasible",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub point: SweepPoint,
    pub scheme: SchemeKind,
    pub draw: usize,
    pub cost: Option<f64>,
    pub size: Option<usize>,
    pub feasible: bool,
    pub elapsed_ms: u64,
    pub status: RunStatus,
    pub elements: Vec<usize>,
}

/// Seed of the target draw `draw`; shared by all algorithms and sweep points.
pub fn targets_seed(master: u64, draw: usize) -> u64 {
    mix_seed(master, &[TARGETS_TAG, draw as u64])
}

/// Seed of one run, derived from the algorithm label, sweep index and draw.
pub fn run_seed(master: u64, algorithm: Algorithm, sweep_index: usize, draw: usize) -> u64 {
    mix_seed(
        master,
        &[tag(algorithm.label()), sweep_index as u64, draw as u64],
    )
}

/// Runs every algorithm on every (sweep point, draw) pair. Records come back in
/// (sweep point, draw, algorithm) order regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    let g = spec.graph.resolve()?;
    spec.validate(&g)?;
    let points = spec.points();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|si| (0..spec.draws).map(move |d| (si, d)))
        .collect();
    let batches: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(si, draw)| run_point(spec, &g, si, points[si], draw))
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

fn run_point(
    spec: &ExperimentSpec,
    g: &Arc<Graph>,
    si: usize,
    point: SweepPoint,
    draw: usize,
) -> Result<Vec<RunRecord>> {
    let targets = match &spec.fixed_targets {
        Some(t) => t.clone(),
        None => gen_targets(
            g,
            &TargetScheme {
                kind: spec.scheme,
                zeta: point.zeta,
                k: point.k,
                seed: targets_seed(spec.master_seed, draw),
            },
        )?,
    };
    let inst = PseudocutInstance::new(g.clone(), point.t, targets, spec.mode)?;
    let unseparable = inst.validate().is_err();
    let mut out = Vec::with_capacity(spec.algorithms.len());
    for &alg in &spec.algorithms {
        let record = |status, sol: Option<&Solution>, elapsed_ms| RunRecord {
            algorithm: alg,
            point,
            scheme: spec.scheme,
            draw,
            cost: sol.map(|s| s.cost),
            size: sol.map(|s| s.size()),
            feasible: sol.is_some_and(|s| s.feasible),
            elapsed_ms: if spec.record_timing { elapsed_ms } else { 0 },
            status,
            elements: sol.map(|s| s.elements.clone()).unwrap_or_default(),
        };
        if unseparable {
            out.push(record(RunStatus::Infeasible, None, 0));
            continue;
        }
        let cfg = GestConfig {
            seed: run_seed(spec.master_seed, alg, si, draw),
            ..spec.gest.clone()
        };
        let started = Instant::now();
        let limits = spec
            .limits
            .clone()
            .with_deadline(started + spec.time_budget);
        let result = alg.solve(&inst, &cfg, &limits);
        let elapsed = started.elapsed().as_millis() as u64;
        out.push(match result {
            Ok(sol) => record(RunStatus::Ok, Some(&sol), elapsed),
            Err(Error::Timeout) => record(RunStatus::Timeout, None, elapsed),
            Err(Error::Budget { .. }) => record(RunStatus::BudgetExceeded, None, elapsed),
            Err(Error::Infeasible(_)) => record(RunStatus::Infeasible, None, elapsed),
            Err(_) => record(RunStatus::Error, None, elapsed),
        });
    }
    Ok(out)
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the per-run CSV, preceded by a `#` line echoing version and seed.
pub fn write_runs<W: Write>(out: W, records: &[RunRecord], master_seed: u64) -> Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# pseudocut {} master_seed={master_seed}",
        env!("CARGO_PKG_VERSION")
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.algorithm.label().to_string(),
            r.point.k.to_string(),
            r.point.t.to_string(),
            r.point.zeta.to_string(),
            r.scheme.to_string(),
            r.draw.to_string(),
            fmt_opt(r.cost),
            fmt_opt(r.size),
            r.feasible.to_string(),
            r.elapsed_ms.to_string(),
            r.status.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregate over the draws of one (algorithm, sweep point).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub point: SweepPoint,
    pub scheme: SchemeKind,
    pub runs: usize,
    pub ok: usize,
    pub mean_cost: Option<f64>,
    pub std_cost: Option<f64>,
    pub mean_size: Option<f64>,
    pub std_size: Option<f64>,
    pub mean_elapsed_ms: f64,
}

/// Mean and sample standard deviation (`None` below two values).
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Summaries in first-appearance order of (sweep point, algorithm); only
/// `ok` runs enter the cost and size statistics.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Algorithm, SweepPoint)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(a, p)| a == r.algorithm && p == r.point) {
            keys.push((r.algorithm, r.point));
        }
    }
    keys.into_iter()
        .map(|(alg, point)| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.algorithm == alg && r.point == point)
                .collect();
            let ok: Vec<&&RunRecord> = group.iter().filter(|r| r.status == RunStatus::Ok).collect();
            let costs: Vec<f64> = ok.iter().filter_map(|r| r.cost).collect();
            let sizes: Vec<f64> = ok.iter().filter_map(|r| r.size.map(|s| s as f64)).collect();
            let (mean_cost, std_cost) = mean_std(&costs);
            let (mean_size, std_size) = mean_std(&sizes);
            SummaryRow {
                algorithm: alg,
                point,
                scheme: group[0].scheme,
                runs: group.len(),
                ok: ok.len(),
                mean_cost,
                std_cost,
                mean_size,
                std_size,
                mean_elapsed_ms: group.iter().map(|r| r.elapsed_ms as f64).sum::<f64>()
                    / group.len() as f64,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow], master_seed: u64) -> Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# pseudocut {} master_seed={master_seed}",
        env!("CARGO_PKG_VERSION")
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.algorithm.label().to_string(),
            r.point.k.to_string(),
            r.point.t.to_string(),
            r.point.zeta.to_string(),
            r.scheme.to_string(),
            r.runs.to_string(),
            r.ok.to_string(),
            fmt_opt(r.mean_cost),
            fmt_opt(r.std_cost),
            fmt_opt(r.mean_size),
            fmt_opt(r.std_size),
            r.mean_elapsed_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_fig1;

    fn fig1_spec() -> ExperimentSpec {
        let (g, _) = gen_fig1();
        let mut spec = ExperimentSpec::new(
            GraphSource::Loaded(g),
            vec![Algorithm::Opt, Algorithm::Gen, Algorithm::Mc],
            SweepPoint {
                k: 1,
                t: 5.0,
                zeta: 0.5,
            },
        );
        spec.fixed_targets = Some(vec![(0, 12)]);
        spec.draws = 1;
        spec.record_timing = false;
        spec
    }

    #[test]
    fn fig1_costs() {
        let recs = run_experiment(&fig1_spec()).unwrap();
        let costs: Vec<_> = recs.iter().map(|r| r.cost.unwrap()).collect();
        assert_eq!(costs, vec![2.0, 2.0, 3.0]);
        assert!(recs.iter().all(|r| r.status == RunStatus::Ok && r.feasible));
    }

    #[test]
    fn csv_header_and_rows() {
        let recs = run_experiment(&fig1_spec()).unwrap();
        let mut buf = Vec::new();
        write_runs(&mut buf, &recs, 0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# pseudocut "));
        assert_eq!(
            lines[1],
            "algorithm,k,T,zeta,scheme,draw,cost,size,feasible,elapsed_ms,status"
        );
        assert_eq!(lines[2], "OPT,1,5,0.5,RR,0,2,2,true,0,ok");
        assert_eq!(lines[4], "MC,1,5,0.5,RR,0,3,3,true,0,ok");
    }

    #[test]
    fn mc_requires_single_pairs() {
        let mut spec = fig1_spec();
        spec.fixed_targets = None;
        spec.sweep = SweepVar::K;
        spec.values = vec![1.0, 2.0];
        assert!(matches!(run_experiment(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn unseparable_draws_are_marked() {
        let mut spec = fig1_spec();
        spec.fixed_targets = Some(vec![(0, 5)]);
        let recs = run_experiment(&spec).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.status == RunStatus::Infeasible && r.cost.is_none()));
    }

    #[test]
    fn statistics() {
        assert_eq!(mean_std(&[]), (None, None));
        assert_eq!(mean_std(&[3.0]), (Some(3.0), None));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        assert!((s.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn algorithm_labels_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.label().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("gesta".parse::<Algorithm>().unwrap(), Algorithm::Gesta);
        assert!("ENBI".parse::<Algorithm>().is_err());
    }

    #[test]
    fn seeds_are_separated_by_algorithm_and_shared_targets() {
        assert_ne!(
            run_seed(1, Algorithm::Gest, 0, 0),
            run_seed(1, Algorithm::Gesta, 0, 0)
        );
        assert_ne!(
            run_seed(1, Algorithm::Gest, 0, 0),
            run_seed(1, Algorithm::Gest, 1, 0)
        );
        assert_eq!(targets_seed(9, 3), targets_seed(9, 3));
        assert_ne!(targets_seed(9, 3), targets_seed(9, 4));
    }
}
