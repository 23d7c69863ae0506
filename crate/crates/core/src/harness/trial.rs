use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cgr_run, opt_bruteforce, sota_run, vvp_run, AlgorithmResult};
use crate::coverage::{Allocation, Instance};
use crate::nbo::{run_nbo, Certificate, NboOutcome, StateClass, StopReason, TraceRecord};
use crate::{Error, NodeId, Result};

use super::config::{AlgId, SweepConfig, TrialConfig};

/// Outcome of one algorithm inside a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgRecord {
    pub alg: AlgId,
    /// `ok`, or the error kind.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default)]
    pub positions: Vec<NodeId>,
    #[serde(default)]
    pub iterations: u64,
    #[serde(default)]
    pub converged: bool,
    #[serde(default)]
    pub wallclock: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_cgr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<StateClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_trace: Option<Vec<f64>>,
}

impl AlgRecord {
    fn ok(alg: AlgId, r: &AlgorithmResult) -> Self {
        AlgRecord {
            alg,
            status: "ok".into(),
            error: None,
            g: Some(r.objective),
            positions: r.allocation.positions().to_vec(),
            iterations: r.iterations,
            converged: r.converged,
            wallclock: r.wallclock,
            ratio_cgr: None,
            ratio_opt: None,
            messages: None,
            class: None,
            stop: None,
            certified: None,
            phi_trace: None,
        }
    }

    fn failed(alg: AlgId, e: &Error) -> Self {
        AlgRecord {
            alg,
            status: error_kind(e).into(),
            error: Some(e.to_string()),
            g: None,
            positions: Vec::new(),
            iterations: 0,
            converged: false,
            wallclock: 0.0,
            ratio_cgr: None,
            ratio_opt: None,
            messages: None,
            class: None,
            stop: None,
            certified: None,
            phi_trace: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Short machine-readable name of an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::IterationCapExceeded { .. } => "iteration_cap",
        Error::InvariantBreach { .. } => "invariant_breach",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::TooManyAgents { .. } => "too_many_agents",
        Error::DisconnectedAdjacency => "disconnected_adjacency",
        Error::PreconditionViolated(_) => "precondition",
        _ => "error",
    }
}

/// One JSON line per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub shape: String,
    pub trial: u64,
    pub seed: u64,
    pub nodes: usize,
    pub agents: usize,
    pub initial: Vec<NodeId>,
    pub config: TrialConfig,
    pub results: Vec<AlgRecord>,
}

impl TrialRecord {
    pub fn result(&self, alg: AlgId) -> Option<&AlgRecord> {
        self.results.iter().find(|r| r.alg == alg)
    }

    /// `G` of `alg` when it succeeded.
    pub fn objective(&self, alg: AlgId) -> Option<f64> {
        self.result(alg).filter(|r| r.is_ok()).and_then(|r| r.g)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// Copy with every wallclock zeroed, for reproducibility comparisons.
    pub fn without_wallclock(&self) -> TrialRecord {
        let mut r = self.clone();
        for a in &mut r.results {
            a.wallclock = 0.0;
        }
        r
    }
}

/// Runs one algorithm. The NBO record also carries messages, the final class
/// and the potential trace.
pub fn run_algorithm(
    inst: &Instance,
    cfg: &TrialConfig,
    alg: AlgId,
    initial: &Allocation,
) -> Result<AlgRecord> {
    Ok(run_algorithm_full(inst, cfg, alg, initial)?.0)
}

fn run_algorithm_full(
    inst: &Instance,
    cfg: &TrialConfig,
    alg: AlgId,
    initial: &Allocation,
) -> Result<(AlgRecord, Option<NboOutcome>)> {
    let n = cfg.agents;
    let rec = match alg {
        AlgId::Nbo => {
            let start = std::time::Instant::now();
            let out = run_nbo(inst, &cfg.nbo, initial.clone())?;
            let r = AlgorithmResult {
                allocation: out.allocation.clone(),
                objective: out.objective,
                iterations: out.iterations,
                converged: out.converged(),
                wallclock: start.elapsed().as_secs_f64(),
            };
            let mut rec = AlgRecord::ok(alg, &r);
            rec.messages = Some(out.messages);
            rec.class = Some(out.class);
            rec.stop = Some(out.stop);
            rec.certified = Some(out.converged() && out.certificate.holds(crate::TOL));
            rec.phi_trace = Some(out.phi_trace.clone());
            return Ok((rec, Some(out)));
        }
        AlgId::Vvp => AlgRecord::ok(alg, &vvp_run(inst, cfg.vvp_max_passes, initial.clone())?),
        AlgId::Sota => AlgRecord::ok(alg, &sota_run(inst, initial.clone())?),
        AlgId::Cgr => AlgRecord::ok(alg, &cgr_run(inst, n)?),
        AlgId::Opt => AlgRecord::ok(
            alg,
            &opt_bruteforce(inst, n, cfg.brute_force_budget as u128)?,
        ),
    };
    Ok((rec, None))
}

fn fill_ratios(results: &mut [AlgRecord]) {
    let find = |alg: AlgId, rs: &[AlgRecord]| {
        rs.iter()
            .find(|r| r.alg == alg && r.is_ok())
            .and_then(|r| r.g)
    };
    let g_cgr = find(AlgId::Cgr, results);
    let g_opt = find(AlgId::Opt, results);
    for r in results.iter_mut() {
        if let Some(g) = r.g {
            r.ratio_cgr = g_cgr.filter(|&d| d > 0.0).map(|d| g / d);
            r.ratio_opt = g_opt.filter(|&d| d > 0.0).map(|d| g / d);
        }
    }
}

/// Generates the environment and initial allocation from the trial seed and
/// runs each requested algorithm from the same start. Algorithm failures are
/// recorded; environment or config failures are returned.
pub fn run_trial(cfg: &TrialConfig, base: Option<&Path>) -> Result<TrialRecord> {
    cfg.validate()?;
    let inst = cfg.instance(base)?;
    let initial = cfg.initial(inst.node_count())?;
    let mut results: Vec<AlgRecord> = cfg
        .algorithms
        .iter()
        .map(|&alg| {
            run_algorithm(&inst, cfg, alg, &initial).unwrap_or_else(|e| AlgRecord::failed(alg, &e))
        })
        .collect();
    fill_ratios(&mut results);
    Ok(TrialRecord {
        shape: cfg.label().to_string(),
        trial: cfg.trial,
        seed: cfg.seed,
        nodes: inst.node_count(),
        agents: cfg.agents,
        initial: initial.into_inner(),
        config: cfg.clone(),
        results,
    })
}

/// A single trial run that stops at the first algorithm error, keeping the
/// full NBO trace.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub record: TrialRecord,
    pub nbo_trace: Vec<TraceRecord>,
    pub certificate: Option<Certificate>,
}

pub fn run_single(cfg: &TrialConfig, base: Option<&Path>) -> Result<SingleRun> {
    cfg.validate()?;
    let inst = cfg.instance(base)?;
    let initial = cfg.initial(inst.node_count())?;
    let mut results = Vec::new();
    let mut nbo_trace = Vec::new();
    let mut certificate = None;
    for &alg in &cfg.algorithms {
        let (rec, nbo) = run_algorithm_full(&inst, cfg, alg, &initial)?;
        if let Some(out) = nbo {
            nbo_trace = out.trace;
            certificate = Some(out.certificate);
        }
        results.push(rec);
    }
    fill_ratios(&mut results);
    Ok(SingleRun {
        record: TrialRecord {
            shape: cfg.label().to_string(),
            trial: cfg.trial,
            seed: cfg.seed,
            nodes: inst.node_count(),
            agents: cfg.agents,
            initial: initial.into_inner(),
            config: cfg.clone(),
            results,
        },
        nbo_trace,
        certificate,
    })
}

/// Raw records of a sweep plus the trials that could not run.
#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub records: Vec<TrialRecord>,
    /// `(shape, trial, message)` of aborted trials.
    pub failures: Vec<(String, u64, String)>,
}

/// Runs every trial on a bounded pool; records come back in config order.
pub fn run_trials(
    configs: &[TrialConfig],
    parallelism: Option<usize>,
    base: Option<&Path>,
) -> Result<SweepOutcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(p) = parallelism {
        builder = builder.num_threads(p.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<TrialRecord>> =
        pool.install(|| configs.par_iter().map(|c| run_trial(c, base)).collect());
    let mut out = SweepOutcome::default();
    for (cfg, r) in configs.iter().zip(outcomes) {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out
                .failures
                .push((cfg.label().to_string(), cfg.trial, e.to_string())),
        }
    }
    Ok(out)
}

/// Runs a sweep and, when `sink` is given, appends one line per record.
pub fn run_sweep(
    cfg: &SweepConfig,
    base: Option<&Path>,
    sink: Option<&mut dyn Write>,
) -> Result<SweepOutcome> {
    let out = run_trials(&cfg.trial_configs(), cfg.parallelism, base)?;
    if let Some(w) = sink {
        for rec in &out.records {
            writeln!(w, "{}", rec.to_json_line()).map_err(|source| Error::Io {
                path: "<results>".into(),
                source,
            })?;
        }
    }
    Ok(out)
}

/// Reads a JSON-lines file. Blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(&text)
}

pub fn parse_records(text: &str) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: k + 1,
            msg: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
