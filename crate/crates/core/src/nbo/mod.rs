//! Neighborhood-optimum solver: pairwise re-optimization over a communication
//! tree rooted at the weakest agent, certified by a monotone potential.

mod state;
mod steps;
mod tree;

use serde::{Deserialize, Serialize};

use crate::coverage::{Allocation, Instance, Partition};
use crate::{AgentId, Error, Result, TOL};

pub use state::{
    certificate, classify, global_info, potential, select_agent, Certificate, GlobalInfo, PairEval,
    SolverState, StateClass,
};
pub use steps::{step_a, step_a_applies, step_b, Step, StepReport};
pub use tree::{build_comm_tree, CommTree};

/// How an agent is picked outside Z1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickMode {
    /// Smallest id whose done flag is unset.
    #[default]
    RoundRobin,
    /// Uniformly random agent from the seeded generator.
    Random,
}

/// Pairs over which the Z3 and Z4 conditions are checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeScope {
    #[default]
    Tree,
    Adjacency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NboConfig {
    pub pick: PickMode,
    pub edge_scope: EdgeScope,
    /// Overrides the default cap derived from the potential range.
    pub iteration_cap: Option<u64>,
    pub check_invariants: bool,
    pub record_trace: bool,
    pub seed: u64,
    /// Test hook: records a fake earlier potential above the first one.
    #[serde(skip)]
    pub debug_inject_breach: bool,
}

impl Default for NboConfig {
    fn default() -> Self {
        NboConfig {
            pick: PickMode::RoundRobin,
            edge_scope: EdgeScope::Tree,
            iteration_cap: None,
            check_invariants: true,
            record_trace: true,
            seed: 0,
            debug_inject_breach: false,
        }
    }
}

/// One solver iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub class: StateClass,
    pub phi: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub u_min: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub selected: [AgentId; 2],
    pub step: Step,
    pub changed: bool,
    /// `|P_ij|`, the size of the pair region.
    #[serde(default)]
    pub region: usize,
    pub messages: u64,
    pub messages_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Reached Z4.
    Converged,
    /// A full round of agents made no progress outside Z4.
    Stalled,
    /// Fewer than two agents; nothing to pair.
    SingleAgent,
}

#[derive(Debug, Clone)]
pub struct NboOutcome {
    pub allocation: Allocation,
    pub partition: Partition,
    pub utilities: Vec<f64>,
    pub objective: f64,
    pub class: StateClass,
    pub stop: StopReason,
    pub iterations: u64,
    pub messages: u64,
    pub phi_trace: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub certificate: Certificate,
}

impl NboOutcome {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

/// `n * (phi_upper - phi_0) / eps_conv`, with `phi_upper = sum_c v_c g(0)` and
/// `eps_conv` the smallest positive weight times `g(d_max)`.
pub fn default_iteration_cap(inst: &Instance, n: usize, phi0: f64) -> u64 {
    let env = inst.env();
    let g = inst.decay();
    let phi_upper: f64 = env.weights().iter().map(|&v| v * g.eval(0)).sum();
    let eps = env
        .weights()
        .iter()
        .copied()
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let eps_conv = if eps.is_finite() {
        eps * g.eval(inst.oracle().d_max())
    } else {
        1.0
    };
    let raw = n as f64 * (phi_upper - phi0).max(0.0) / eps_conv.max(1e-12);
    (raw.ceil() as u64).clamp(10_000, 100_000_000)
}

fn breach(state: &SolverState, message: String) -> Error {
    Error::InvariantBreach {
        message,
        dump: state.dump(),
    }
}

/// Runs the solver from `initial` until Z4, a stall, or the iteration cap.
pub fn run_nbo(inst: &Instance, config: &NboConfig, initial: Allocation) -> Result<NboOutcome> {
    let mut state = SolverState::new(inst, initial, config.seed)?;
    run_from_state(inst, config, &mut state)
}

/// Runs the solver loop on an existing state.
pub fn run_from_state(
    inst: &Instance,
    config: &NboConfig,
    state: &mut SolverState,
) -> Result<NboOutcome> {
    let n = state.agent_count();
    let mut trace = Vec::new();
    let mut cap = config.iteration_cap;
    let mut progress_in_round = false;
    let mut idle_streak = 0u64;
    let stop = loop {
        let tree_msgs = state.rebuild_tree()?;
        let info = global_info(state);
        let class = classify(inst, state, &info, config.edge_scope)?;
        let phi = potential(state, &info);
        if config.debug_inject_breach && state.phi_trace.is_empty() {
            state.phi_trace.push(phi + 1.0);
        }
        if let Some(&last) = state.phi_trace.last() {
            if phi < last - TOL {
                return Err(breach(
                    state,
                    format!(
                        "potential fell from {last} to {phi} at iteration {}",
                        state.iteration
                    ),
                ));
            }
        }
        state.phi_trace.push(phi);
        let cap = *cap.get_or_insert_with(|| default_iteration_cap(inst, n, phi));
        if class == StateClass::Z4 {
            break StopReason::Converged;
        }
        let Some((i, j)) = select_agent(state, &info, class, config.pick) else {
            break StopReason::SingleAgent;
        };
        if state.iteration >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        let before = config
            .check_invariants
            .then(|| (state.partition.union(i, j), state.partition.clone()));
        let report = if steps::step_a_applies(inst, state, &info, i, j)? {
            step_a(inst, state, &info, i, j)?
        } else {
            step_b(inst, state, &info, i, j)?
        };
        state.last_plus = report.merged_into;
        if let Some((region, old)) = before {
            check_step(inst, state, &old, &region, i, j)?;
        }
        let delta = tree_msgs + info.message_count_delta + report.region_size as u64;
        state.messages += delta;
        if config.record_trace {
            trace.push(TraceRecord {
                t: state.iteration,
                class,
                phi,
                g: inst.objective(state.alloc.positions())?,
                u_min: info.u_min,
                v: info.v,
                selected: [i, j],
                step: report.step,
                changed: report.changed,
                region: report.region_size,
                messages: delta,
                messages_total: state.messages,
            });
        }
        state.iteration += 1;

        // Stall detection: a full round (or, for random picks, a long streak)
        // without any change cannot reach Z4.
        if report.changed {
            idle_streak = 0;
            progress_in_round = true;
        } else {
            idle_streak += 1;
        }
        if class == StateClass::Z1 && !report.changed {
            break StopReason::Stalled;
        }
        if class != StateClass::Z1 {
            match config.pick {
                PickMode::RoundRobin => {
                    state.done[i] = true;
                    if state.done.iter().all(|&d| d) {
                        if !progress_in_round {
                            break StopReason::Stalled;
                        }
                        progress_in_round = false;
                    }
                }
                PickMode::Random => {
                    if idle_streak > 64 * n as u64 {
                        break StopReason::Stalled;
                    }
                }
            }
        }
    };
    let info = global_info(state);
    let class = classify(inst, state, &info, config.edge_scope)?;
    let cert = certificate(inst, state, config.edge_scope)?;
    Ok(NboOutcome {
        allocation: state.alloc.clone(),
        partition: state.partition.clone(),
        utilities: state.utilities.clone(),
        objective: inst.objective(state.alloc.positions())?,
        class,
        stop,
        iterations: state.iteration,
        messages: state.messages,
        phi_trace: state.phi_trace.clone(),
        trace,
        certificate: cert,
    })
}

/// Exclusivity, partition validity and locality after a step on `(i, j)`.
fn check_step(
    inst: &Instance,
    state: &SolverState,
    old: &Partition,
    region: &[crate::NodeId],
    i: AgentId,
    j: AgentId,
) -> Result<()> {
    if let Err(e) = state.alloc.validate(inst.node_count()) {
        return Err(breach(state, format!("allocation invalid: {e}")));
    }
    if let Err(e) = state.partition.validate(inst.env(), &state.alloc) {
        return Err(breach(state, format!("partition invalid: {e}")));
    }
    if state.partition.union(i, j) != region {
        return Err(breach(
            state,
            format!("step on ({i}, {j}) changed the pair region"),
        ));
    }
    for k in (0..state.agent_count()).filter(|&k| k != i && k != j) {
        if state.partition.block(k) != old.block(k) {
            return Err(breach(
                state,
                format!("step on ({i}, {j}) changed block {k}"),
            ));
        }
    }
    Ok(())
}
