use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::{AgentAdjacency, Allocation, Instance, Partition};
use crate::env_graph::generators::rng_for;
use crate::{AgentId, Error, NodeId, Result, TOL};

use super::tree::{build_comm_tree, CommTree};
use super::{EdgeScope, PickMode};

/// Solver state classes. `Z2` stands for `Z2 \ Z3` and `Z3` for `Z3 \ Z4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateClass {
    Z1,
    Z2,
    Z3,
    Z4,
}

impl std::fmt::Display for StateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Values shared over the communication tree each iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalInfo {
    pub u_min: f64,
    pub i_min: AgentId,
    pub x_imin: NodeId,
    pub i_max_plus: AgentId,
    /// `max_i M1(x_i; P_i)`.
    pub v: f64,
    pub message_count_delta: u64,
}

/// Exhaustive results for one pair region, keyed by its node set.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEval {
    pub m2: f64,
    pub b2: Vec<NodeId>,
    /// `M3 - M2`; zero when the region cannot hold three agents.
    pub third_gain: f64,
    pub b3: Option<Vec<NodeId>>,
}

const CACHE_LIMIT: usize = 1 << 14;

#[derive(Debug, Clone)]
pub struct SolverState {
    pub(crate) alloc: Allocation,
    pub(crate) partition: Partition,
    pub(crate) utilities: Vec<f64>,
    /// `M1(x_i; P_i)` per agent.
    pub(crate) m1: Vec<f64>,
    pub(crate) adjacency: AgentAdjacency,
    pub(crate) tree: CommTree,
    pub(crate) iteration: u64,
    pub(crate) phi_trace: Vec<f64>,
    pub(crate) messages: u64,
    pub(crate) done: Vec<bool>,
    pub(crate) rng: ChaCha8Rng,
    /// Receiver of the last vacated block; wins `i_max_plus` ties.
    pub(crate) last_plus: Option<AgentId>,
    cache: HashMap<Vec<NodeId>, PairEval>,
}

impl SolverState {
    /// Voronoi partition of the initial allocation plus the tree rooted at the
    /// minimum-utility agent.
    pub fn new(inst: &Instance, alloc: Allocation, seed: u64) -> Result<Self> {
        alloc.validate(inst.node_count())?;
        let partition = inst.voronoi(&alloc)?;
        Self::with_partition(inst, alloc, partition, seed)
    }

    pub fn with_partition(
        inst: &Instance,
        alloc: Allocation,
        partition: Partition,
        seed: u64,
    ) -> Result<Self> {
        alloc.validate(inst.node_count())?;
        partition.validate(inst.env(), &alloc)?;
        let n = alloc.len();
        let adjacency = inst.agent_adjacency(&partition);
        let mut state = SolverState {
            utilities: vec![0.0; n],
            m1: vec![0.0; n],
            alloc,
            partition,
            adjacency,
            tree: CommTree::from_parents((0..n).map(|a| (a > 0).then_some(0)).collect())?,
            iteration: 0,
            phi_trace: Vec::new(),
            messages: 0,
            done: vec![false; n],
            rng: rng_for(seed),
            last_plus: None,
            cache: HashMap::new(),
        };
        for agent in 0..n {
            state.refresh_agent(inst, agent)?;
        }
        let root = state.argmin_utility();
        state.tree = build_comm_tree(&state.adjacency, root)?.0;
        Ok(state)
    }

    pub fn allocation(&self) -> &Allocation {
        &self.alloc
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn m1(&self) -> &[f64] {
        &self.m1
    }

    pub fn adjacency(&self) -> &AgentAdjacency {
        &self.adjacency
    }

    pub fn tree(&self) -> &CommTree {
        &self.tree
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn phi_trace(&self) -> &[f64] {
        &self.phi_trace
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn agent_count(&self) -> usize {
        self.alloc.len()
    }

    /// Replaces the tree, e.g. with a hand-built one. It must span the agents
    /// and use adjacency edges only.
    pub fn set_tree(&mut self, tree: CommTree) -> Result<()> {
        if tree.agent_count() != self.agent_count() || !tree.is_subgraph_of(&self.adjacency) {
            return Err(Error::InvalidParams(
                "tree does not fit the agent adjacency".into(),
            ));
        }
        self.tree = tree;
        Ok(())
    }

    /// Recomputes the utility and `M1` of one agent from its block.
    pub(crate) fn refresh_agent(&mut self, inst: &Instance, agent: AgentId) -> Result<()> {
        let block = self.partition.block(agent);
        let x = self.alloc.position(agent);
        let view = inst.view(block)?;
        self.utilities[agent] = inst
            .utility_in(&view, x)
            .ok_or(Error::AgentOutsideBlock { agent, node: x })?;
        self.m1[agent] =
            match crate::coverage::marginal_gain(inst.env(), inst.decay(), &view, &[x], 1) {
                Ok(gain) => gain,
                Err(Error::RegionTooSmall { .. }) => 0.0,
                Err(e) => return Err(e),
            };
        Ok(())
    }

    pub(crate) fn refresh_adjacency(&mut self, inst: &Instance) {
        self.adjacency = inst.agent_adjacency(&self.partition);
    }

    fn argmin_utility(&self) -> AgentId {
        let u_min = self.utilities.iter().copied().fold(f64::INFINITY, f64::min);
        self.utilities
            .iter()
            .position(|&u| u <= u_min + TOL)
            .expect("at least one agent")
    }

    /// Rebuilds the tree rooted at the minimum-utility agent; returns the
    /// number of messages spent.
    pub fn rebuild_tree(&mut self) -> Result<u64> {
        let root = self.argmin_utility();
        let (tree, msgs) = build_comm_tree(&self.adjacency, root)?;
        self.tree = tree;
        Ok(msgs)
    }

    /// Cached `M2`, `B2`, `M3 - M2` and `B3` of the union of two blocks.
    pub fn pair_eval(&mut self, inst: &Instance, i: AgentId, j: AgentId) -> Result<PairEval> {
        let region = self.partition.union(i, j);
        if let Some(hit) = self.cache.get(&region) {
            return Ok(hit.clone());
        }
        let view = inst.view(&region)?;
        let b2 = crate::coverage::best_placement(inst.env(), inst.decay(), &view, &[], 2)?;
        let (third_gain, b3) =
            match crate::coverage::best_placement(inst.env(), inst.decay(), &view, &[], 3) {
                Ok(p) => (p.gain - b2.gain, Some(p.nodes)),
                Err(Error::RegionTooSmall { .. }) => (0.0, None),
                Err(e) => return Err(e),
            };
        let eval = PairEval {
            m2: b2.gain,
            b2: b2.nodes,
            third_gain,
            b3,
        };
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(region, eval.clone());
        Ok(eval)
    }

    /// Pairs whose regions decide the Z3 and Z4 tests.
    pub(crate) fn check_edges(&self, scope: EdgeScope) -> Vec<(AgentId, AgentId)> {
        match scope {
            EdgeScope::Tree => self.tree.edges(),
            EdgeScope::Adjacency => self.adjacency.edges(),
        }
    }

    /// JSON snapshot for diagnostics.
    pub fn dump(&self) -> String {
        serde_json::json!({
            "iteration": self.iteration,
            "positions": self.alloc.positions(),
            "blocks": self.partition.blocks(),
            "utilities": self.utilities,
            "m1": self.m1,
            "tree_parents": self.tree.parents(),
            "phi_trace_tail": &self.phi_trace[self.phi_trace.len().saturating_sub(8)..],
            "messages": self.messages,
        })
        .to_string()
    }
}

/// `u_min`, `i_min`, `x_imin`, `V` and `i_max_plus`. Ties within tolerance go
/// to the lowest id, except that the receiver of the last vacated block keeps
/// priority for `i_max_plus` so the freed space keeps moving toward `i_min`. Costs `2(n-1)` messages.
pub fn global_info(state: &SolverState) -> GlobalInfo {
    let n = state.agent_count();
    let u_min = state
        .utilities
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let i_min = state.argmin_utility();
    let v = state.m1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i_max_plus = match state.last_plus {
        Some(p) if state.m1[p] >= v - TOL => p,
        _ => state
            .m1
            .iter()
            .position(|&m| m >= v - TOL)
            .expect("at least one agent"),
    };
    GlobalInfo {
        u_min,
        i_min,
        x_imin: state.alloc.position(i_min),
        i_max_plus,
        v,
        message_count_delta: 2 * (n as u64).saturating_sub(1),
    }
}

/// Classifies the state. Z3 and Z4 are tested on the pairs selected by `scope`.
pub fn classify(
    inst: &Instance,
    state: &mut SolverState,
    info: &GlobalInfo,
    scope: EdgeScope,
) -> Result<StateClass> {
    if info.v > info.u_min + TOL {
        return Ok(StateClass::Z1);
    }
    let edges = state.check_edges(scope);
    let mut z4 = true;
    for &(i, j) in &edges {
        let eval = state.pair_eval(inst, i, j)?;
        if eval.third_gain > info.u_min + TOL {
            return Ok(StateClass::Z2);
        }
        if z4 && (state.utilities[i] + state.utilities[j] - eval.m2).abs() > TOL {
            z4 = false;
        }
    }
    Ok(if z4 { StateClass::Z4 } else { StateClass::Z3 })
}

/// `sum_i u_i + max(0, V - u_min)`.
pub fn potential(state: &SolverState, info: &GlobalInfo) -> f64 {
    state.utilities.iter().sum::<f64>() + (info.v - info.u_min).max(0.0)
}

/// Picks the acting pair `(i, j)`. Returns `None` for a single agent.
pub fn select_agent(
    state: &mut SolverState,
    info: &GlobalInfo,
    class: StateClass,
    pick: PickMode,
) -> Option<(AgentId, AgentId)> {
    let n = state.agent_count();
    if n < 2 {
        return None;
    }
    let i = if class == StateClass::Z1 {
        info.i_max_plus
    } else {
        match pick {
            PickMode::RoundRobin => {
                if state.done.iter().all(|&d| d) {
                    state.done.fill(false);
                }
                state
                    .done
                    .iter()
                    .position(|&d| !d)
                    .expect("flags were reset")
            }
            PickMode::Random => state.rng.gen_range(0..n),
        }
    };
    let j = state
        .tree
        .parent(i)
        .unwrap_or_else(|| state.tree.children(i)[0]);
    Some((i, j))
}

/// Residuals of the terminal conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// `max(0, max_{(i,j)} (M3 - M2) - u_min)`.
    pub z3_residual: f64,
    /// `max_{(i,j)} |u_i + u_j - M2|`.
    pub z4_residual: f64,
    /// `max(0, V - u_min)`.
    pub m1_residual: f64,
}

impl Certificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.z3_residual <= tol && self.z4_residual <= tol && self.m1_residual <= tol
    }
}

/// Recomputes the Z3/Z4 residuals over `scope` and the `M1 <= u_min` residual.
pub fn certificate(
    inst: &Instance,
    state: &mut SolverState,
    scope: EdgeScope,
) -> Result<Certificate> {
    let info = global_info(state);
    let mut cert = Certificate {
        z3_residual: 0.0,
        z4_residual: 0.0,
        m1_residual: (info.v - info.u_min).max(0.0),
    };
    for (i, j) in state.check_edges(scope) {
        let eval = state.pair_eval(inst, i, j)?;
        cert.z3_residual = cert.z3_residual.max(eval.third_gain - info.u_min);
        cert.z4_residual = cert
            .z4_residual
            .max((state.utilities[i] + state.utilities[j] - eval.m2).abs());
    }
    Ok(cert)
}
