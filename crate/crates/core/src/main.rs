use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use covctl::coverage::RegionMetric;
use covctl::env_graph::{Decay, EnvGraph, DEFAULT_EPSILON};
use covctl::harness::{
    self, AlgId, InitMode, ScalabilityConfig, ShapeSpec, SweepConfig, TrialConfig,
};
use covctl::nbo::{EdgeScope, NboConfig, PickMode};
use covctl::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_ALGORITHM: u8 = 4;
const EXIT_BREACH: u8 = 5;

/// Multi-agent coverage control on graphs: generate environments, run the
/// neighborhood-optimum solver and baselines, sweep experiments, validate results.
#[derive(Parser, Debug)]
#[command(name = "covctl", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated environment graph as JSON.
    Generate(GenerateArgs),
    /// Run one trial with one or all algorithms.
    Run(RunArgs),
    /// Run a configured sweep and write results.jsonl plus reports.
    Sweep(SweepArgs),
    /// Time the solver over grid sizes and team sizes.
    Scalability(ScalabilityArgs),
    /// Rebuild summary and report files from results.jsonl.
    Report(ReportArgs),
    /// Re-check every record of a results.jsonl file.
    Validate(ValidateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ShapeKind {
    Chain,
    Star,
    Tree,
    Maze,
    Bridge,
    Indoor,
    Lattice3d,
    Grid,
    Orlib,
}

#[derive(Args, Debug, Clone, Default)]
struct ShapeArgs {
    /// Environment generator.
    #[arg(long, value_enum)]
    shape: Option<ShapeKind>,
    /// Node count (chain, tree).
    #[arg(long)]
    m: Option<usize>,
    /// Valued nodes; defaults to half the nodes (a third for mazes).
    #[arg(long)]
    valued: Option<usize>,
    /// Star branches.
    #[arg(long)]
    branches: Option<usize>,
    /// Star branch length.
    #[arg(long)]
    branch_len: Option<usize>,
    /// Maze corridor width (1 or 2).
    #[arg(long)]
    w: Option<usize>,
    /// Maze nodes removed from the template.
    #[arg(long)]
    removed: Option<usize>,
    /// Grid width.
    #[arg(long)]
    width: Option<usize>,
    /// Grid height.
    #[arg(long)]
    height: Option<usize>,
    /// Lattice dimensions, e.g. 5x5x3.
    #[arg(long)]
    dims: Option<String>,
    /// OR-library p-median file.
    #[arg(long)]
    orlib: Option<PathBuf>,
    /// OR-library cost units per hop.
    #[arg(long, default_value_t = 1.0)]
    cost_scale: f64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Master seed.
    #[arg(long, env = "COVCTL_SEED", default_value_t = 0)]
    seed: u64,
    /// Weight of non-valued nodes.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AlgChoice {
    Nbo,
    Vvp,
    Sota,
    Cgr,
    Opt,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MetricChoice {
    Induced,
    Global,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum InitChoice {
    Uniform,
    Packed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PickChoice {
    RoundRobin,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ScopeChoice {
    Tree,
    Adjacency,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Environment graph JSON; replaces --shape.
    #[arg(long, conflicts_with = "shape")]
    graph: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Algorithm to run.
    #[arg(long, value_enum, default_value = "nbo")]
    alg: AlgChoice,
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Trial seed for the environment and the initial allocation.
    #[arg(long, env = "COVCTL_SEED", default_value_t = 0)]
    seed: u64,
    /// Weight of non-valued nodes.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Decay g: inv1p or exp:<rate>.
    #[arg(long, default_value = "inv1p")]
    decay: String,
    /// Distances used inside regions.
    #[arg(long, value_enum, default_value = "induced")]
    metric: MetricChoice,
    /// Initial positions.
    #[arg(long, value_enum, default_value = "uniform")]
    init: InitChoice,
    /// Agent picking outside Z1.
    #[arg(long, value_enum, default_value = "round-robin")]
    pick: PickChoice,
    /// Pairs checked for Z3 and Z4.
    #[arg(long, value_enum, default_value = "tree")]
    edge_scope: ScopeChoice,
    /// Solver iteration cap; derived from the potential range when absent.
    #[arg(long)]
    iteration_cap: Option<u64>,
    /// VVP pass cap.
    #[arg(long, default_value_t = 500)]
    vvp_max_passes: u64,
    /// Brute-force budget in candidate allocations.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Write the per-iteration solver trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the state dump on an invariant breach.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, hide = true)]
    debug_inject_breach: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long, env = "COVCTL_SEED")]
    seed: Option<u64>,
    /// Trials per experiment; overrides the config file.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; overrides the config file.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct ScalabilityArgs {
    /// Scalability configuration (TOML); built-in grid when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the runtime table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, env = "COVCTL_SEED")]
    seed: Option<u64>,
    /// Seeds per cell; overrides the config file.
    #[arg(long)]
    seeds: Option<u64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// results.jsonl to summarize.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// results.jsonl to check.
    #[arg(long)]
    input: PathBuf,
    /// Directory for relative graph paths in records.
    #[arg(long)]
    base: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvariantBreach { .. } => EXIT_BREACH,
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Json(_)
            | Error::InvalidParams(_)
            | Error::DisconnectedGraph { .. }
            | Error::InvalidEdge(..)
            | Error::NegativeWeight { .. }
            | Error::EmptyInput => EXIT_CONFIG,
            _ => EXIT_ALGORITHM,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn need<T>(v: Option<T>, flag: &str, shape: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--shape {shape} requires --{flag}")))
}

fn shape_spec(a: &ShapeArgs) -> CliResult<ShapeSpec> {
    let kind = a
        .shape
        .ok_or_else(|| usage("missing --shape (or --graph)"))?;
    let half = |m: usize| a.valued.unwrap_or(m / 2);
    Ok(match kind {
        ShapeKind::Chain => {
            let m = need(a.m, "m", "chain")?;
            ShapeSpec::Chain { m, valued: half(m) }
        }
        ShapeKind::Tree => {
            let m = need(a.m, "m", "tree")?;
            ShapeSpec::Tree { m, valued: half(m) }
        }
        ShapeKind::Star => {
            let branches = need(a.branches, "branches", "star")?;
            let branch_len = need(a.branch_len, "branch-len", "star")?;
            ShapeSpec::Star {
                branches,
                branch_len,
                valued: half(1 + branches * branch_len),
            }
        }
        ShapeKind::Maze => ShapeSpec::Maze {
            w: need(a.w, "w", "maze")?,
            removed: a.removed,
            valued: a.valued,
        },
        ShapeKind::Bridge => ShapeSpec::Bridge {
            valued: half(covctl::env_graph::gen_bridge().node_count()),
        },
        ShapeKind::Indoor => ShapeSpec::Indoor {
            valued: half(covctl::env_graph::gen_indoor().node_count()),
        },
        ShapeKind::Grid => {
            let width = need(a.width, "width", "grid")?;
            let height = need(a.height, "height", "grid")?;
            ShapeSpec::Grid {
                width,
                height,
                valued: half(width * height),
            }
        }
        ShapeKind::Lattice3d => {
            let text = need(a.dims.as_deref(), "dims", "lattice3d")?;
            let dims: Vec<usize> = text
                .split('x')
                .map(|t| t.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| usage(format!("--dims expects AxBxC, got {text:?}")))?;
            let [x, y, z] = dims[..] else {
                return Err(usage(format!("--dims expects AxBxC, got {text:?}")));
            };
            ShapeSpec::Lattice3d {
                dims: [x, y, z],
                valued: half(x * y * z),
            }
        }
        ShapeKind::Orlib => ShapeSpec::Orlib {
            path: need(a.orlib.clone(), "orlib", "orlib")?,
            cost_scale: a.cost_scale,
        },
    })
}

fn echo_config(command: &str, config: &impl serde::Serialize) {
    eprintln!("{}", json!({ "command": command, "config": config }));
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| {
            Failure::from(Error::Io {
                path: p.to_path_buf(),
                source,
            })
        }),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure {
                code: EXIT_CONFIG,
                message: e.to_string(),
            })
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> CliResult {
    let spec = shape_spec(&a.shape)?;
    echo_config(
        "generate",
        &json!({ "shape": spec, "seed": a.seed, "epsilon": a.epsilon }),
    );
    let env: EnvGraph = spec.build(a.seed, a.epsilon, None)?;
    write_out(a.out.as_deref(), &env.to_json())
}

fn cmd_run(a: RunArgs) -> CliResult {
    let shape = match &a.graph {
        Some(p) => ShapeSpec::File { path: p.clone() },
        None => shape_spec(&a.shape)?,
    };
    let decay: Decay = a.decay.parse().map_err(|e: Error| usage(e.to_string()))?;
    let algorithms = match a.alg {
        AlgChoice::All => AlgId::ALL.to_vec(),
        AlgChoice::Nbo => vec![AlgId::Nbo],
        AlgChoice::Vvp => vec![AlgId::Vvp],
        AlgChoice::Sota => vec![AlgId::Sota],
        AlgChoice::Cgr => vec![AlgId::Cgr],
        AlgChoice::Opt => vec![AlgId::Opt],
    };
    let cfg = TrialConfig {
        name: String::new(),
        shape,
        agents: a.n,
        seed: a.seed,
        trial: 0,
        epsilon: a.epsilon,
        decay,
        metric: match a.metric {
            MetricChoice::Induced => RegionMetric::Induced,
            MetricChoice::Global => RegionMetric::Global,
        },
        init: match a.init {
            InitChoice::Uniform => InitMode::Uniform,
            InitChoice::Packed => InitMode::Packed,
        },
        algorithms,
        nbo: NboConfig {
            pick: match a.pick {
                PickChoice::RoundRobin => PickMode::RoundRobin,
                PickChoice::Random => PickMode::Random,
            },
            edge_scope: match a.edge_scope {
                ScopeChoice::Tree => EdgeScope::Tree,
                ScopeChoice::Adjacency => EdgeScope::Adjacency,
            },
            iteration_cap: a.iteration_cap,
            check_invariants: true,
            record_trace: a.trace.is_some(),
            seed: a.seed,
            debug_inject_breach: a.debug_inject_breach,
        },
        vvp_max_passes: a.vvp_max_passes,
        brute_force_budget: a.budget,
    };
    echo_config("run", &cfg);
    let run = match harness::run_single(&cfg, None) {
        Ok(r) => r,
        Err(Error::InvariantBreach { message, dump }) => {
            let path = a.dump.clone().unwrap_or_else(|| {
                std::env::temp_dir().join(format!("covctl-breach-{}.json", a.seed))
            });
            let written = std::fs::write(&path, &dump).is_ok();
            return Err(Failure {
                code: EXIT_BREACH,
                message: if written {
                    format!(
                        "invariant breach: {message}; state dump: {}",
                        path.display()
                    )
                } else {
                    format!(
                        "invariant breach: {message}; could not write dump to {}",
                        path.display()
                    )
                },
            });
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.trace {
        let mut text = String::new();
        for t in &run.nbo_trace {
            text.push_str(&serde_json::to_string(t).map_err(Error::from)?);
            text.push('\n');
        }
        write_out(Some(path), &text)?;
    }
    let doc = json!({
        "seed": run.record.seed,
        "nodes": run.record.nodes,
        "agents": run.record.agents,
        "initial": run.record.initial,
        "results": run.record.results.iter().map(|r| {
            let mut v = serde_json::to_value(r).expect("record serializes");
            if let Some(obj) = v.as_object_mut() {
                obj.remove("phi_trace");
            }
            v
        }).collect::<Vec<_>>(),
        "certificate": run.certificate,
    });
    write_out(
        a.out.as_deref(),
        &serde_json::to_string_pretty(&doc).map_err(Error::from)?,
    )
}

fn cmd_sweep(a: SweepArgs) -> CliResult {
    let mut cfg = SweepConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = a.trials {
        if t == 0 {
            return Err(usage("--trials must be positive"));
        }
        cfg.trials = t;
    }
    if a.jobs.is_some() {
        cfg.parallelism = a.jobs;
    }
    echo_config("sweep", &cfg);
    let base = a.config.parent().map(Path::to_path_buf);
    std::fs::create_dir_all(&a.out).map_err(|source| {
        Failure::from(Error::Io {
            path: a.out.clone(),
            source,
        })
    })?;
    let results_path = a.out.join("results.jsonl");
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&results_path)
        .map_err(|source| {
            Failure::from(Error::Io {
                path: results_path.clone(),
                source,
            })
        })?;
    let out = harness::run_sweep(&cfg, base.as_deref(), Some(&mut file))?;
    if out.records.is_empty() {
        return Err(Error::EmptyInput.into());
    }
    let summary = harness::summarize(&out.records)?;
    harness::write_report(&out.records, &summary, &a.out)?;
    for (shape, trial, msg) in &out.failures {
        eprintln!("trial {shape}/{trial} aborted: {msg}");
    }
    println!(
        "{} records written to {}",
        out.records.len(),
        results_path.display()
    );
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_ALGORITHM,
            message: format!("{} trials aborted", out.failures.len()),
        })
    }
}

fn cmd_scalability(a: ScalabilityArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| {
                Failure::from(Error::Io {
                    path: p.clone(),
                    source,
                })
            })?;
            ScalabilityConfig::from_toml(&text)?
        }
        None => ScalabilityConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    echo_config("scalability", &cfg);
    let table = harness::scalability_sweep(&cfg)?;
    let csv = table.to_csv();
    if let Some(p) = &a.out {
        write_out(Some(p), &csv)?;
    }
    print!("{csv}");
    println!(
        "runtime non-decreasing in |C|: {}; non-increasing in n: {}",
        table.size_trend_ok, table.agent_trend_ok
    );
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CliResult {
    echo_config("report", &json!({ "input": a.input, "out": a.out }));
    let records = harness::read_records(&a.input)?;
    let summary = harness::summarize(&records)?;
    let files = harness::write_report(&records, &summary, &a.out)?;
    println!("report written to {}", files.markdown.display());
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> CliResult {
    echo_config("validate", &json!({ "input": a.input, "base": a.base }));
    let records = harness::read_records(&a.input)?;
    if records.is_empty() {
        return Err(Error::EmptyInput.into());
    }
    let report = harness::validate_records(&records, a.base.as_deref());
    for issue in &report.issues {
        println!(
            "record {} ({} trial {}): {}",
            issue.index, issue.shape, issue.trial, issue.message
        );
    }
    if report.passed() {
        println!("{} records valid", report.checked);
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_ALGORITHM,
            message: format!(
                "{} issues in {} records",
                report.issues.len(),
                report.checked
            ),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Scalability(a) => cmd_scalability(a),
        Command::Report(a) => cmd_report(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
