use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use confdesign::eda::{run, AlgoConfig, Algorithm, RunFailure, RunOptions, SearchSpace};
use confdesign::error::RunError;
use confdesign::fitness::FitnessConfig;
use confdesign::harness::{compare, compare_csv, history_csv, write_run_artifacts, RunHistory};
use confdesign::model::{DegreeRule, Problem, ProblemFile, Solution, VarKind};
use confdesign::repair::Repairer;

#[derive(Parser)]
#[command(name = "confdesign", version, about = "Configuration design of mechanical assemblies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and write its artifacts.
    Run(RunArgs),
    /// Run several algorithms repeatedly and aggregate their best-fitness curves.
    Compare(CompareArgs),
    /// Repair one solution and print the result.
    Repair(RepairArgs),
    /// Print the variable layout of a problem file.
    Inspect(SpecArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Problem file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Degree rule sums incident component codes instead of counting components.
    #[arg(long)]
    eq22_literal_sum: bool,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    #[arg(long, default_value_t = 0.2)]
    truncation: f64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Gibbs updates per sample, in multiples of the variable count.
    #[arg(long, default_value_t = 1000)]
    gibbs_multiplier: usize,
    #[arg(long, default_value_t = 0.9)]
    crossover: f64,
    #[arg(long, default_value_t = 0.1)]
    mutation: f64,
    /// Fraction of the ranked population eligible for GA tournaments.
    #[arg(long, default_value_t = 0.6)]
    tournament: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parallel fitness evaluations (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Stop after this many generations without improvement.
    #[arg(long)]
    stagnation: Option<usize>,
    #[arg(long)]
    no_elitism: bool,
    /// Re-evaluate repeated solutions instead of caching their fitness.
    #[arg(long)]
    no_cache: bool,
    /// Sum the signed vertical acceleration instead of its magnitude.
    #[arg(long)]
    signed_accel: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 100)]
    pop: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<String>,
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Population size, either one value or `algo=N` entries.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pop: Vec<String>,
}

#[derive(Args)]
struct RepairArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Flat solution as a JSON array, or a file holding one (or an object with `values`).
    #[arg(long)]
    solution: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// `println!` into a string buffer.
macro_rules! outln {
    ($buf:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        let _ = writeln!($buf, $($arg)*);
    }};
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Evaluation(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Repair(a) => cmd_repair(a).map_err(Failure::from),
        Command::Inspect(a) => cmd_inspect(a).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
        Err(Failure::Evaluation(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let m = cause.to_string();
        if out.ends_with(&m) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&m);
    }
    out
}

fn load(args: &SpecArgs, signed_accel: bool) -> Result<ProblemFile> {
    let mut pf = ProblemFile::load(&args.spec).with_context(|| format!("loading {}", args.spec.display()))?;
    if args.eq22_literal_sum {
        match &mut pf.problem {
            Problem::Assembly(spec) => spec.set_degree_rule(DegreeRule::SumCodes),
            Problem::Categorical(_) => bail!("--eq22-literal-sum needs an assembly problem"),
        }
    }
    if signed_accel {
        match &mut pf.fitness {
            FitnessConfig::Suspension(p) => p.signed_acceleration = true,
            _ => bail!("--signed-accel needs the suspension fitness"),
        }
    }
    Ok(pf)
}

fn config(common: &Common, algorithm: Algorithm, pop: usize) -> Result<AlgoConfig> {
    let mut c = AlgoConfig::new(algorithm);
    c.population_size = pop;
    c.truncation_rate = common.truncation;
    c.confidence_level = common.confidence;
    c.gibbs_sweep_multiplier = common.gibbs_multiplier;
    c.ga_crossover_rate = common.crossover;
    c.ga_mutation_rate = common.mutation;
    c.ga_tournament_truncation = common.tournament;
    c.iteration_budget = common.iters;
    c.stagnation_window = common.stagnation;
    c.seed = common.seed;
    c.elitism = !common.no_elitism;
    c.cache_fitness = !common.no_cache;
    c.validate()?;
    Ok(c)
}

fn options(common: &Common, pf: &ProblemFile) -> RunOptions {
    let jobs = common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    RunOptions { jobs: jobs.max(1), spec_hash: Some(pf.hash.clone()) }
}

fn classify(f: RunFailure) -> Failure {
    let e = anyhow!("{f}");
    match f.error {
        RunError::Config(_) => Failure::Usage(e),
        RunError::Repair(_) | RunError::Eval(_) => Failure::Evaluation(e),
    }
}

fn write_config(dir: &Path, history: &RunHistory) -> Result<()> {
    let echo = serde_json::json!({ "config": history.config, "spec_hash": history.spec_hash });
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&echo)? + "\n")?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let algorithm: Algorithm = a.algo.parse().map_err(anyhow::Error::from)?;
    let pf = load(&a.common.spec, a.common.signed_accel)?;
    let cfg = config(&a.common, algorithm, a.pop)?;
    let evaluator = pf.fitness.build(&pf.problem).map_err(|e| Failure::Evaluation(e.into()))?;
    let space = SearchSpace::new(pf.problem.clone());
    let opts = options(&a.common, &pf);
    let out = &a.common.out;
    match run(&space, &cfg, evaluator.as_ref(), &opts) {
        Ok(h) => {
            write_run_artifacts(out, &pf.problem, &h).context("writing artifacts")?;
            write_config(out, &h)?;
            emit(&history_csv(&h));
            println!(
                "{} ({}): best fitness {} after {} evaluations; artifacts in {}",
                algorithm,
                evaluator.name(),
                h.best_fitness,
                h.total_evals(),
                out.display()
            );
            Ok(())
        }
        Err(f) => {
            if !f.partial.records.is_empty() {
                let _ = write_run_artifacts(out, &pf.problem, &f.partial);
            }
            Err(classify(f))
        }
    }
}

fn population_sizes(entries: &[String], algos: &[Algorithm]) -> Result<BTreeMap<String, usize>> {
    let mut sizes = BTreeMap::new();
    let mut shared = None;
    for e in entries {
        match e.split_once('=') {
            Some((name, n)) => {
                let algo: Algorithm = name.trim().parse()?;
                sizes.insert(
                    algo.name().to_string(),
                    n.trim().parse().with_context(|| format!("bad --pop entry `{e}`"))?,
                );
            }
            None => shared = Some(e.trim().parse::<usize>().with_context(|| format!("bad --pop value `{e}`"))?),
        }
    }
    for a in algos {
        sizes.entry(a.name().to_string()).or_insert(shared.unwrap_or(100));
    }
    Ok(sizes)
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let algos: Vec<Algorithm> =
        a.algos.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(anyhow::Error::from)?;
    if a.runs == 0 {
        return Err(anyhow!("--runs must be at least 1").into());
    }
    let pf = load(&a.common.spec, a.common.signed_accel)?;
    let sizes = population_sizes(&a.pop, &algos)?;
    let configs: Vec<AlgoConfig> =
        algos.iter().map(|&al| config(&a.common, al, sizes[al.name()])).collect::<Result<_>>()?;
    confdesign::harness::check_shared_budget(&configs).map_err(anyhow::Error::from)?;
    let evaluator = pf.fitness.build(&pf.problem).map_err(|e| Failure::Evaluation(e.into()))?;
    let space = SearchSpace::new(pf.problem.clone());
    let opts = options(&a.common, &pf);
    let (report, _) = compare(&space, evaluator.as_ref(), &configs, a.runs, &opts).map_err(classify)?;
    std::fs::create_dir_all(&a.common.out).context("creating output directory")?;
    std::fs::write(a.common.out.join("compare.csv"), compare_csv(&report)).context("writing compare.csv")?;
    for c in &report.curves {
        println!(
            "{}: {} runs, final mean best {} (std {}), {} evaluations",
            c.algorithm,
            c.runs,
            c.mean.last().copied().unwrap_or(f64::NAN),
            c.std.last().copied().unwrap_or(f64::NAN),
            c.total_evals
        );
    }
    println!("wrote {}", a.common.out.join("compare.csv").display());
    Ok(())
}

fn parse_solution(arg: &str) -> Result<Solution> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    let v: serde_json::Value = serde_json::from_str(&text).context("parsing solution")?;
    let values = v.get("values").cloned().unwrap_or(v);
    let codes: Vec<u8> = serde_json::from_value(values).context("solution must be an array of codes")?;
    Ok(Solution::new(codes))
}

fn cmd_repair(a: RepairArgs) -> Result<()> {
    let pf = load(&a.spec, false)?;
    let s = parse_solution(&a.solution)?;
    pf.problem.check_solution(&s)?;
    let out = match &pf.problem {
        Problem::Assembly(spec) => {
            let r = Repairer::new(spec).repair(&s, a.seed)?;
            serde_json::json!({
                "values": r.repaired.values(),
                "stage": r.stage_used,
                "joints_retyped": r.joints_retyped,
                "cp_nodes": r.cp_nodes_explored,
                "feasible": pf.problem.is_feasible(&r.repaired),
            })
        }
        Problem::Categorical(_) => serde_json::json!({ "values": s.values(), "stage": "none", "feasible": true }),
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(())
}

fn cmd_inspect(a: SpecArgs) -> Result<()> {
    let pf = load(&a, false)?;
    let mut out = String::new();
    let domains = pf.problem.domain_sizes();
    match &pf.problem {
        Problem::Assembly(spec) => {
            let n = spec.n_joints();
            outln!(out, "variables: {} ({} joints, {} components)", spec.n_variables(), n, spec.n_variables() - n);
            outln!(out, "joint types: {}, component types: {}", spec.n_joint_types(), spec.n_component_types());
            for e in spec.envos() {
                let members: Vec<String> = e.members.iter().map(|m| (m + 1).to_string()).collect();
                outln!(out, "envo {}: joints {}", e.name, members.join(","));
            }
            for r in spec.type_rules() {
                outln!(out, "type rule: joint type {} <=> component type {}", r.joint_type, r.component_type);
            }
            outln!(out, "index\tvariable\tdomain");
            for v in spec.index().variables() {
                let name = match v.kind {
                    VarKind::Joint { joint } => format!("y{}", joint + 1),
                    VarKind::Component { i, j } => format!("z{},{}", i + 1, j + 1),
                };
                outln!(out, "{}\t{}\t0..{}", v.flat_index, name, domains[v.flat_index] - 1);
            }
        }
        Problem::Categorical(_) => {
            outln!(out, "variables: {} (categorical)", domains.len());
            outln!(out, "index\tvariable\tdomain");
            for (i, d) in domains.iter().enumerate() {
                outln!(out, "{i}\tx{i}\t0..{}", d - 1);
            }
        }
    }
    outln!(out, "fitness: {}", pf.fitness.build(&pf.problem).map(|e| e.name().to_string()).unwrap_or_default());
    outln!(out, "sha256: {}", pf.hash);
    emit(&out);
    Ok(())
}
