use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudocut::baseline::{per_threshold, transform_per_graph};
use pseudocut::experiment::{
    run_experiment, summarize, write_runs, write_summary, Algorithm, ExperimentSpec, GraphSource,
    SweepPoint, SweepVar,
};
use pseudocut::generators::{
    gen_er, gen_fig1, gen_hierarchical, gen_targets, gen_tightness, gen_waxman, read_targets,
    targets_text, SchemeKind, TargetScheme, WaxmanParams, WeightMode,
};
use pseudocut::{
    enumerate_paths, ElementMode, Error, GestConfig, Graph, Limits, PseudocutInstance, Solution,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pseudocut", version, about = "Minimum T-pseudocut solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the solution as JSON.
    Solve(SolveArgs),
    /// List every path of length at most T between the target pairs.
    Enumerate(EnumerateArgs),
    /// Write a generated graph in the text format.
    Generate(GenerateArgs),
    /// Draw target pairs by degree class.
    Targets(TargetsArgs),
    /// Turn per-link packet error rates into additive lengths.
    TransformPer(TransformArgs),
    /// Sweep a parameter over random target draws and write CSV.
    Experiment(ExperimentArgs),
    /// Check whether a solution separates every target pair.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Optional `v cost` lines.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// `s t` lines.
    #[arg(long)]
    targets: PathBuf,
    #[arg(long = "T", short = 'T')]
    threshold: f64,
    #[arg(long, default_value = "vertex")]
    mode: ElementMode,
    /// Extra elements that may not be removed.
    #[arg(long, value_delimiter = ',')]
    forbid: Vec<usize>,
}

impl InstanceArgs {
    fn load(&self) -> anyhow::Result<PseudocutInstance> {
        let mut g = load_graph(&self.graph)?;
        if let Some(path) = &self.costs {
            g.load_vertex_costs(open(path)?)?;
        }
        let targets = read_targets(open(&self.targets)?)?;
        let inst = PseudocutInstance::new(Arc::new(g), self.threshold, targets, self.mode)?;
        Ok(inst.with_forbidden(self.forbid.iter().copied())?)
    }
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 10_000_000)]
    max_paths: usize,
    #[arg(long, default_value_t = 5_000_000)]
    max_lp_pivots: usize,
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_paths: self.max_paths,
            max_lp_pivots: self.max_lp_pivots,
            max_search_nodes: self.max_nodes,
            deadline: None,
        }
    }
}

#[derive(Args)]
struct GestArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Disable the shortest-path fallback.
    #[arg(long)]
    no_fallback: bool,
    /// Samples per pair per iteration; lowering it voids the accuracy guarantee.
    #[arg(long = "L-override")]
    l_override: Option<usize>,
}

impl GestArgs {
    fn config(&self) -> GestConfig {
        if self.l_override.is_some() {
            eprintln!("warning: --L-override replaces the sample count; the estimate accuracy bound no longer holds");
        }
        GestConfig {
            alpha: self.alpha,
            seed: self.seed,
            max_iterations: self.max_iterations,
            fallback: !self.no_fallback,
            samples_override: self.l_override,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    gest: GestArgs,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Er,
    Waxman,
    Hierarchical,
    Fig1,
    Tightness,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    model: Model,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    m: usize,
    /// Waxman distance scale.
    #[arg(long, default_value_t = 0.15)]
    alpha_w: f64,
    /// Waxman acceptance scale.
    #[arg(long, default_value_t = 0.2)]
    beta_w: f64,
    /// Hierarchical: number of domains (n and m then describe each domain).
    #[arg(long, default_value_t = 10)]
    domains: usize,
    /// Hierarchical: edges between domains.
    #[arg(long, default_value_t = 20)]
    domain_edges: usize,
    /// Tightness gadget size.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "uniform")]
    weights: Weights,
    /// Shorthand for `--weights integer`.
    #[arg(long)]
    integer_weights: bool,
    /// Shorthand for `--weights unit`.
    #[arg(long)]
    unit_lengths: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed instances only: where to write the target pair.
    #[arg(long)]
    targets_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Uniform,
    Integer,
    Unit,
}

#[derive(Args)]
struct TargetsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = parse_scheme, default_value = "RR")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 0.5)]
    zeta: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Graph whose length column holds error rates.
    #[arg(long, required_unless_present = "threshold")]
    graph: Option<PathBuf>,
    /// Print the length threshold for a cumulative error-rate bound instead.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Graph file; otherwise `--er` or `--waxman` generates one.
    #[arg(long, conflicts_with_all = ["er", "waxman"])]
    graph: Option<PathBuf>,
    /// `n,m` of a generated ER graph.
    #[arg(long, value_delimiter = ',')]
    er: Option<Vec<usize>>,
    /// `n,m` of a generated Waxman graph.
    #[arg(long, value_delimiter = ',')]
    waxman: Option<Vec<usize>>,
    #[arg(long, default_value = "uniform")]
    weights: Weights,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "GEN,GESTA")]
    algos: Vec<Algorithm>,
    #[arg(long, value_parser = parse_scheme, default_value = "RR")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long = "T", short = 'T')]
    threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    zeta: f64,
    #[arg(long, value_parser = parse_sweep, default_value = "T")]
    sweep: SweepVar,
    /// Sweep values; defaults to the base value of the swept variable.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use these pairs for every draw instead of sampling.
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long, default_value = "vertex")]
    mode: ElementMode,
    /// Per-run wall-clock budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_budget: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long = "L-override")]
    l_override: Option<usize>,
    #[arg(long, default_value_t = 10_000_000)]
    max_paths: usize,
    /// Write 0 for elapsed time so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Per-run CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// A solution JSON object, or whitespace-separated element ids.
    #[arg(long)]
    solution: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepVar, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    Graph::parse(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn weight_mode(w: Weights, integer: bool, unit: bool) -> WeightMode {
    match (unit, integer, w) {
        (true, _, _) | (_, _, Weights::Unit) => WeightMode::Unit,
        (_, true, _) | (_, _, Weights::Integer) => WeightMode::Integer,
        _ => WeightMode::Uniform,
    }
}

fn limits_with_budget(args: &LimitArgs) -> Limits {
    let limits = args.limits();
    match args.time_budget {
        Some(s) => limits.with_deadline(Instant::now() + Duration::from_secs_f64(s)),
        None => limits,
    }
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let inst = args.instance.load()?;
    let limits = limits_with_budget(&args.limits);
    let sol = args.algo.solve(&inst, &args.gest.config(), &limits)?;
    println!("{}", serde_json::to_string(&sol)?);
    Ok(())
}

fn enumerate(args: EnumerateArgs) -> anyhow::Result<()> {
    let inst = args.instance.load()?;
    let cov = enumerate_paths(&inst, &limits_with_budget(&args.limits))?;
    emit(args.out.as_deref(), &cov.dump())
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let weights = weight_mode(args.weights, args.integer_weights, args.unit_lengths);
    let waxman = |n, m| WaxmanParams {
        n,
        m_target: m,
        alpha: args.alpha_w,
        beta: args.beta_w,
        weights,
    };
    let (g, pair) = match args.model {
        Model::Er => (gen_er(args.n, args.m, weights, args.seed)?, None),
        Model::Waxman => (gen_waxman(&waxman(args.n, args.m), args.seed)?, None),
        Model::Hierarchical => {
            let top = waxman(args.domains, args.domain_edges);
            (
                gen_hierarchical(&top, &waxman(args.n, args.m), args.seed)?,
                None,
            )
        }
        Model::Fig1 => {
            let (g, inst) = gen_fig1();
            ((*g).clone(), Some(inst.targets().to_vec()))
        }
        Model::Tightness => {
            if !(1..=20).contains(&args.k) {
                bail!(Error::InvalidInput("tightness k must lie in 1..=20".into()));
            }
            let (g, inst) = gen_tightness(args.k);
            ((*g).clone(), Some(inst.targets().to_vec()))
        }
    };
    if let Some(path) = &args.targets_out {
        match &pair {
            Some(p) => std::fs::write(path, targets_text(p))?,
            None => bail!(Error::InvalidInput(
                "--targets-out applies to fixed instances only".into()
            )),
        }
    }
    emit(args.out.as_deref(), &g.to_text())
}

fn targets(args: TargetsArgs) -> anyhow::Result<()> {
    let g = load_graph(&args.graph)?;
    let pairs = gen_targets(
        &g,
        &TargetScheme {
            kind: args.scheme,
            zeta: args.zeta,
            k: args.k,
            seed: args.seed,
        },
    )?;
    emit(args.out.as_deref(), &targets_text(&pairs))
}

fn transform_per(args: TransformArgs) -> anyhow::Result<()> {
    if let Some(p) = args.threshold {
        println!("{}", per_threshold(p)?);
        return Ok(());
    }
    let path = args
        .graph
        .expect("clap requires --graph without --threshold");
    let g = transform_per_graph(&load_graph(&path)?)?;
    emit(args.out.as_deref(), &g.to_text())
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let weights = weight_mode(args.weights, false, false);
    for (flag, v) in [("--er", &args.er), ("--waxman", &args.waxman)] {
        if v.as_ref().is_some_and(|v| v.len() != 2) {
            bail!(Error::InvalidInput(format!("{flag} takes n,m")));
        }
    }
    let source = match (&args.graph, &args.er, &args.waxman) {
        (Some(p), _, _) => GraphSource::Loaded(Arc::new(load_graph(p)?)),
        (_, Some(nm), _) => GraphSource::Er {
            n: nm[0],
            m: nm[1],
            weights,
            seed: args.graph_seed,
        },
        (_, _, Some(nm)) => GraphSource::Waxman {
            params: WaxmanParams {
                weights,
                ..WaxmanParams::new(nm[0], nm[1])
            },
            seed: args.graph_seed,
        },
        _ => bail!(Error::InvalidInput(
            "one of --graph, --er or --waxman is required".into()
        )),
    };
    let base = SweepPoint {
        k: args.k,
        t: args.threshold,
        zeta: args.zeta,
    };
    let mut spec = ExperimentSpec::new(source, args.algos.clone(), base);
    spec.mode = args.mode;
    spec.scheme = args.scheme;
    spec.sweep = args.sweep;
    spec.values = if args.values.is_empty() {
        vec![match args.sweep {
            SweepVar::K => args.k as f64,
            SweepVar::T => args.threshold,
            SweepVar::Zeta => args.zeta,
        }]
    } else {
        args.values.clone()
    };
    spec.draws = args.draws;
    spec.master_seed = args.seed;
    spec.fixed_targets = match &args.targets {
        Some(p) => Some(read_targets(open(p)?)?),
        None => None,
    };
    spec.time_budget = Duration::from_secs_f64(args.time_budget);
    spec.limits.max_paths = args.max_paths;
    spec.gest.alpha = args.alpha;
    spec.gest.samples_override = args.l_override;
    spec.record_timing = !args.no_timing;

    let records = run_experiment(&spec)?;
    let mut buf = Vec::new();
    write_runs(&mut buf, &records, args.seed)?;
    emit(args.out.as_deref(), std::str::from_utf8(&buf)?)?;
    if let Some(path) = &args.summary {
        let mut buf = Vec::new();
        write_summary(&mut buf, &summarize(&records), args.seed)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}

fn read_solution(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let sol: Solution = serde_json::from_str(&text).context("parsing solution JSON")?;
        return Ok(sol.elements);
    }
    text.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| {
                anyhow::Error::new(Error::InvalidInput(format!("bad element id '{t}'")))
            })
        })
        .collect()
}

fn verify(args: VerifyArgs) -> anyhow::Result<()> {
    let inst = args.instance.load()?;
    let w = read_solution(&args.solution)?;
    let mask = inst.removal_mask(&w)?;
    let distances: Vec<Option<f64>> = inst
        .targets()
        .iter()
        .map(|&(s, t)| {
            let d = inst.graph().distance_masked(s, t, inst.mode(), &mask);
            d.is_finite().then_some(d)
        })
        .collect();
    let feasible = inst.is_feasible(&w)?;
    let report = json!({
        "feasible": feasible,
        "cost": inst.cost_of(&w),
        "elements": w,
        "T": inst.threshold(),
        "distances": distances,
    });
    println!("{report}");
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 3,
        Some(e) if e.is_resource() => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Solve(a) => solve(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Generate(a) => generate(a),
        Command::Targets(a) => targets(a),
        Command::TransformPer(a) => transform_per(a),
        Command::Experiment(a) => experiment(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
