//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use covctl::baselines::{sota_run, vvp_run};
use covctl::coverage::Allocation;
use covctl::harness::{
    benchmark_experiments, run_single, run_trials, scalability_sweep, trial_seed, AlgId,
    ScalabilityConfig, ShapeSpec, Stats, SweepConfig, TrialConfig, TrialRecord,
};
use covctl::nbo::{
    classify, global_info, run_nbo, Certificate, EdgeScope, NboConfig, SolverState, StateClass,
    StopReason, TraceRecord,
};
use rayon::prelude::*;

const TOL: f64 = 1e-9;
const TRIALS: u64 = 32;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// One finished solver run, kept for the potential and certificate checks.
struct NboRun {
    label: String,
    phi: Vec<f64>,
    stop: Option<StopReason>,
    certified: bool,
    certificate: Option<Certificate>,
}

#[derive(Default)]
struct Log {
    runs: Vec<NboRun>,
    traces: Vec<(String, usize, Vec<TraceRecord>)>,
}

impl Log {
    fn add_records(&mut self, records: &[TrialRecord]) {
        for r in records {
            if let Some(a) = r.result(AlgId::Nbo) {
                self.runs.push(NboRun {
                    label: format!("{}#{}", r.shape, r.trial),
                    phi: a.phi_trace.clone().unwrap_or_default(),
                    stop: a.stop,
                    certified: a.certified == Some(true),
                    certificate: None,
                });
            }
        }
    }
}

/// Small brute-forceable instances: chains, width-1 mazes and trees.
fn small_instances() -> Vec<TrialConfig> {
    (0..200u64)
        .map(|i| {
            let (family, shape, agents) = match i % 3 {
                0 => {
                    let m = 12 + (i as usize / 3) % 9;
                    (
                        "chain",
                        ShapeSpec::Chain { m, valued: m / 2 },
                        2 + (i as usize / 3) % 4,
                    )
                }
                1 => (
                    "maze",
                    ShapeSpec::Maze {
                        w: 1,
                        removed: Some(9 + (i as usize / 3) % 4),
                        valued: Some(6),
                    },
                    2 + (i as usize / 3) % 3,
                ),
                _ => {
                    let m = 10 + (i as usize / 3) % 9;
                    (
                        "tree",
                        ShapeSpec::Tree { m, valued: m / 2 },
                        2 + (i as usize / 3) % 3,
                    )
                }
            };
            TrialConfig {
                name: family.into(),
                shape,
                agents,
                seed: trial_seed(0xacce, family, i),
                trial: i,
                algorithms: vec![AlgId::Nbo, AlgId::Cgr],
                ..TrialConfig::default()
            }
        })
        .collect()
}

struct SmallResult {
    label: String,
    nodes: usize,
    g_nbo: f64,
    g_cgr: f64,
    g_opt: f64,
}

/// Criteria 1 and 8.
fn brute_forceable(log: &mut Log) -> (Verdict, Verdict) {
    let configs = small_instances();
    let out: Vec<_> = configs
        .par_iter()
        .map(|cfg| {
            let run = run_single(cfg, None).expect("small instance runs");
            let env = cfg.instance(None).unwrap().env().clone();
            let g_opt = oracle_opt(&env, cfg.agents);
            (cfg.clone(), run, g_opt, env.node_count())
        })
        .collect();
    let mut results = Vec::new();
    for (cfg, run, g_opt, nodes) in out {
        let label = format!("{}#{} (m={nodes}, n={})", cfg.name, cfg.trial, cfg.agents);
        let nbo = run.record.result(AlgId::Nbo).unwrap();
        log.runs.push(NboRun {
            label: label.clone(),
            phi: nbo.phi_trace.clone().unwrap_or_default(),
            stop: nbo.stop,
            certified: nbo.certified == Some(true),
            certificate: run.certificate,
        });
        log.traces.push((label.clone(), cfg.agents, run.nbo_trace));
        results.push(SmallResult {
            label,
            nodes,
            g_nbo: nbo.g.unwrap(),
            g_cgr: run.record.objective(AlgId::Cgr).unwrap(),
            g_opt,
        });
    }
    let m_max = results.iter().map(|r| r.nodes).max().unwrap();
    let worst = |f: &dyn Fn(&SmallResult) -> f64| {
        results
            .iter()
            .map(|r| (f(r) / r.g_opt, &r.label))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    };

    let bad1: Vec<_> = results
        .iter()
        .filter(|r| r.g_nbo < 0.5 * r.g_opt - TOL)
        .collect();
    let (w1, l1) = worst(&|r| r.g_nbo);
    let mean1 = results.iter().map(|r| r.g_nbo / r.g_opt).sum::<f64>() / results.len() as f64;
    let c1 = verdict(
        bad1.is_empty(),
        format!(
            "{} instances (|C| <= {m_max}): {} violations of G_NBO >= G_OPT/2; mean NBO/OPT {mean1:.4}, worst {w1:.4} on {l1}",
            results.len(),
            bad1.len()
        ),
    );

    let bound = 1.0 - (-1.0f64).exp();
    let bad8: Vec<_> = results
        .iter()
        .filter(|r| r.g_cgr < bound * r.g_opt - TOL)
        .collect();
    let (w8, l8) = worst(&|r| r.g_cgr);
    let c8 = verdict(
        bad8.is_empty(),
        format!(
            "{} instances: {} violations of G_CGR >= (1-1/e) G_OPT; worst CGR/OPT {w8:.4} on {l8}",
            results.len(),
            bad8.len()
        ),
    );
    (c1, c8)
}

fn benchmark_sweep() -> Vec<TrialRecord> {
    let mut experiments = benchmark_experiments();
    for e in &mut experiments {
        if e.name == "chains" {
            e.algorithms.push(AlgId::Opt);
        }
    }
    let sweep = SweepConfig {
        master_seed: 0,
        trials: TRIALS,
        parallelism: None,
        experiments,
    };
    let out = run_trials(&sweep.trial_configs(), None, None).expect("sweep runs");
    assert!(
        out.failures.is_empty(),
        "trial failures: {:?}",
        out.failures
    );
    out.records
}

fn ratios(records: &[TrialRecord], shape: &str, alg: AlgId, opt: bool) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.shape == shape)
        .filter_map(|r| r.result(alg))
        .filter_map(|a| if opt { a.ratio_opt } else { a.ratio_cgr })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    Stats::of(xs).map_or(f64::NAN, |s| s.mean)
}

fn efficiency(records: &[TrialRecord]) -> Verdict {
    let nbo = Stats::of(&ratios(records, "chains", AlgId::Nbo, true)).unwrap();
    let vvp = Stats::of(&ratios(records, "chains", AlgId::Vvp, false)).unwrap();
    let sota = Stats::of(&ratios(records, "chains", AlgId::Sota, false)).unwrap();
    let checks = [
        ("NBO/OPT", nbo, 0.84, 0.96),
        ("VVP/CGR", vvp, 0.41, 0.62),
        ("SOTA/CGR", sota, 0.55, 0.80),
    ];
    let pass = checks
        .iter()
        .all(|(_, s, lo, hi)| (*lo..=*hi).contains(&s.mean));
    let detail = checks
        .iter()
        .map(|(name, s, lo, hi)| {
            let ok = if (*lo..=*hi).contains(&s.mean) {
                "in"
            } else {
                "OUT of"
            };
            format!("{name} {:.3}±{:.3} {ok} [{lo}, {hi}]", s.mean, s.std)
        })
        .collect::<Vec<_>>()
        .join("; ");
    verdict(
        pass,
        format!("chain 20/10, n=5, {} seeds: {detail}", nbo.count),
    )
}

fn ordering(records: &[TrialRecord]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for shape in [
        "chains",
        "stars",
        "trees",
        "indoor",
        "maze_w1",
        "maze_w2",
        "bridge",
        "lattice3d",
    ] {
        let nbo = mean(&ratios(records, shape, AlgId::Nbo, false));
        let sota = mean(&ratios(records, shape, AlgId::Sota, false));
        let vvp = mean(&ratios(records, shape, AlgId::Vvp, false));
        let ok = nbo >= sota && sota >= vvp;
        pass &= ok;
        parts.push(format!(
            "{shape} {nbo:.3}/{sota:.3}/{vvp:.3}{}",
            if ok { "" } else { " (x)" }
        ));
    }
    let diffs: Vec<f64> = ratios(records, "chains", AlgId::Nbo, false)
        .iter()
        .zip(ratios(records, "chains", AlgId::Sota, false))
        .map(|(a, b)| a - b)
        .collect();
    let d = Stats::of(&diffs).unwrap();
    let gap_ok = d.mean - d.ci95 > 0.0;
    pass &= gap_ok;
    verdict(
        pass,
        format!(
            "NBO/SOTA/VVP vs CGR: {}; chains NBO-SOTA gap {:.3}±{:.3} (95%)",
            parts.join(", "),
            d.mean,
            d.ci95
        ),
    )
}

fn potential_monotone(log: &Log) -> Verdict {
    let mut steps = 0usize;
    let mut bad = Vec::new();
    for r in &log.runs {
        for w in r.phi.windows(2) {
            steps += 1;
            if w[1] < w[0] - TOL {
                bad.push(format!("{}: {} -> {}", r.label, w[0], w[1]));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} runs, {steps} transitions, {} decreases{}",
            log.runs.len(),
            bad.len(),
            bad.first()
                .map(|b| format!(" (first: {b})"))
                .unwrap_or_default()
        ),
    )
}

fn certificates(log: &Log) -> Verdict {
    let not_converged: Vec<_> = log
        .runs
        .iter()
        .filter(|r| r.stop != Some(StopReason::Converged))
        .map(|r| r.label.as_str())
        .collect();
    let uncertified = log
        .runs
        .iter()
        .filter(|r| r.stop == Some(StopReason::Converged) && !r.certified)
        .count();
    let worst = log
        .runs
        .iter()
        .filter_map(|r| r.certificate)
        .map(|c| c.z3_residual.max(c.z4_residual).max(c.m1_residual))
        .fold(0.0, f64::max);
    verdict(
        not_converged.is_empty() && uncertified == 0 && worst <= TOL,
        format!(
            "{} runs: {} did not reach Z4{}, {uncertified} uncertified, max residual {worst:.1e}",
            log.runs.len(),
            not_converged.len(),
            not_converged
                .first()
                .map(|l| format!(" (e.g. {l})"))
                .unwrap_or_default()
        ),
    )
}

fn one_agent_per_valued_node() -> Verdict {
    let configs: Vec<TrialConfig> = (0..50u64)
        .map(|i| {
            let k = 3 + (i as usize) % 4;
            let (name, shape) = if i % 2 == 0 {
                (
                    "chain",
                    ShapeSpec::Chain {
                        m: 14 + (i as usize) % 7,
                        valued: k,
                    },
                )
            } else {
                (
                    "maze",
                    ShapeSpec::Maze {
                        w: 1 + (i as usize / 2) % 2,
                        removed: None,
                        valued: Some(k),
                    },
                )
            };
            TrialConfig {
                name: name.into(),
                shape,
                agents: k,
                seed: trial_seed(0x7e42, name, i),
                trial: i,
                algorithms: vec![AlgId::Nbo],
                ..TrialConfig::default()
            }
        })
        .collect();
    let bad: Vec<String> = configs
        .par_iter()
        .filter_map(|cfg| {
            let inst = cfg.instance(None).unwrap();
            let run = run_single(cfg, None).unwrap();
            let pos = &run.record.result(AlgId::Nbo).unwrap().positions;
            let valued = inst.env().valued();
            let ok = pos.iter().all(|p| valued.contains(p)) && valued.len() == pos.len();
            (!ok).then(|| format!("{}#{}", cfg.name, cfg.trial))
        })
        .collect();
    verdict(
        bad.is_empty(),
        format!(
            "{} instances with n = |C+|: {} exceptions {:?}",
            configs.len(),
            bad.len(),
            bad
        ),
    )
}

fn unit_path_fixture() -> Verdict {
    let start = Instant::now();
    let env = unit_path(12);
    let inst = instance(env.clone());
    let opt = oracle_opt(&env, 2);
    let alloc = |p: [usize; 2]| Allocation::new(p.to_vec(), 12).unwrap();
    let nbo = run_nbo(&inst, &NboConfig::default(), alloc([0, 1]))
        .unwrap()
        .objective;
    let sota = sota_run(&inst, alloc([0, 1])).unwrap().objective;
    let switched = sota_run(&inst, alloc([1, 0])).unwrap().objective;
    let vvp = vvp_run(&inst, 500, alloc([0, 1])).unwrap().objective;
    let secs = start.elapsed().as_secs_f64();
    let pass = (nbo - opt).abs() < TOL
        && sota < opt - TOL
        && switched > sota + TOL
        && switched < opt - TOL
        && secs < 1.0;
    verdict(
        pass,
        format!(
            "OPT {opt:.4}: NBO {nbo:.4}, SOTA {sota:.4}, order-switched SOTA {switched:.4}, VVP {vvp:.4} ({secs:.3} s)"
        ),
    )
}

fn grid_example() -> Verdict {
    let inst = instance(example_grid());
    let alloc = Allocation::new(example_positions(), inst.node_count()).unwrap();
    let mut state = SolverState::new(&inst, alloc, 0).unwrap();
    let g = inst.objective(&example_positions()).unwrap();
    let u = state.utilities().to_vec();
    let quoted = [1.0, 1.5, 3.2, 4.2, 5.0, 1.5];
    let u_ok = u.iter().zip(quoted).all(|(a, b)| (a - b).abs() <= 0.05);
    let neighbors_ok = state.adjacency().neighbors(4) == [2, 3, 5];
    let info = global_info(&state);
    let class = classify(&inst, &mut state, &info, EdgeScope::Tree).unwrap();
    let m1_e = state.m1()[4];
    let pass = (g - 16.4).abs() <= 0.05
        && u_ok
        && neighbors_ok
        && class == StateClass::Z1
        && (info.v - 1.5).abs() <= 0.05
        && (info.u_min - 1.0).abs() <= TOL
        && (m1_e - 1.5).abs() <= 0.05;
    let us: Vec<String> = u.iter().map(|x| format!("{x:.3}")).collect();
    verdict(
        pass,
        format!(
            "G {g:.3}; u = ({}); N(e) = {:?}; {class:?} with V {:.3}, u_min {:.3}; M1(e) {m1_e:.3}",
            us.join(", "),
            state.adjacency().neighbors(4),
            info.v,
            info.u_min
        ),
    )
}

fn scalability() -> Verdict {
    let cfg = ScalabilityConfig::default();
    let t = scalability_sweep(&cfg).unwrap();
    let fmt = |cells: &[covctl::harness::ScalabilityCell], by_size: bool| {
        cells
            .iter()
            .map(|c| {
                let key = if by_size { c.nodes } else { c.agents };
                format!("{key}:{:.1}ms", c.median_secs * 1e3)
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        t.size_trend_ok && t.agent_trend_ok,
        format!(
            "{} seeds/cell; |C| at n={} -> {} ({}); n at |C|={} -> {} ({})",
            cfg.seeds,
            cfg.fixed_agents,
            fmt(&t.by_size, true),
            if t.size_trend_ok {
                "non-decreasing"
            } else {
                "NOT non-decreasing"
            },
            cfg.fixed_size,
            fmt(&t.by_agents, false),
            if t.agent_trend_ok {
                "non-increasing"
            } else {
                "NOT non-increasing"
            },
        ),
    )
}

fn determinism_and_messages(log: &Log) -> Verdict {
    let sweep = SweepConfig {
        master_seed: 0,
        trials: 8,
        parallelism: None,
        experiments: benchmark_experiments()
            .into_iter()
            .map(|mut e| {
                e.algorithms = vec![AlgId::Nbo];
                e
            })
            .collect(),
    };
    let configs = sweep.trial_configs();
    let mut mismatches = Vec::new();
    let mut traces: Vec<(String, usize, Vec<TraceRecord>)> = Vec::new();
    for cfg in &configs {
        let a = run_single(cfg, None).unwrap();
        let b = run_single(cfg, None).unwrap();
        if a.nbo_trace != b.nbo_trace
            || a.record.without_wallclock() != b.record.without_wallclock()
        {
            mismatches.push(format!("{}#{}", cfg.label(), cfg.trial));
        }
        traces.push((
            format!("{}#{}", cfg.label(), cfg.trial),
            cfg.agents,
            a.nbo_trace,
        ));
    }
    let mut iterations = 0usize;
    let mut over = Vec::new();
    for (label, n, trace) in traces.iter().chain(&log.traces) {
        let n = *n as u64;
        for t in trace {
            iterations += 1;
            let bound = n * (n - 1) / 2 + 2 * (n - 1) + t.region as u64;
            if t.messages > bound {
                over.push(format!("{label} t={}: {} > {bound}", t.t, t.messages));
            }
        }
    }
    verdict(
        mismatches.is_empty() && over.is_empty(),
        format!(
            "{} reruns, {} trace mismatches; {iterations} iterations, {} over the per-iteration message bound{}",
            configs.len(),
            mismatches.len(),
            over.len(),
            over.first().map(|o| format!(" (first: {o})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut log = Log::default();
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();

    let (c1, c8) = brute_forceable(&mut log);
    let records = benchmark_sweep();
    log.add_records(&records);

    verdicts.push((1, "approximation ratio 2", c1));
    verdicts.push((2, "chain efficiency", efficiency(&records)));
    verdicts.push((3, "ordering NBO >= SOTA >= VVP", ordering(&records)));
    verdicts.push((4, "potential monotone", potential_monotone(&log)));
    verdicts.push((5, "Z4 certificates", certificates(&log)));
    verdicts.push((6, "n = |C+| covers C+", one_agent_per_valued_node()));
    verdicts.push((7, "12-node path fixture", unit_path_fixture()));
    verdicts.push((8, "greedy 1-1/e", c8));
    verdicts.push((9, "grid example", grid_example()));
    verdicts.push((10, "scalability trends", scalability()));
    verdicts.push((
        11,
        "determinism and messages",
        determinism_and_messages(&log),
    ));

    let mut failed = 0;
    for (id, title, v) in &verdicts {
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {title}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        verdicts.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
