use serde::{Deserialize, Serialize};

use crate::coverage::Instance;
use crate::{AgentId, Error, NodeId, Result, TOL};

use super::state::{GlobalInfo, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    A,
    B,
}

/// What a step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: Step,
    pub changed: bool,
    /// Agent that received the vacated block in step b.
    pub merged_into: Option<AgentId>,
    /// Size of the pair region, counted as exchanged messages.
    pub region_size: usize,
}

fn require_tree_edge(state: &SolverState, i: AgentId, j: AgentId) -> Result<()> {
    if i == j || !state.tree.has_edge(i, j) {
        return Err(Error::PreconditionViolated(format!(
            "({i}, {j}) is not a tree edge"
        )));
    }
    Ok(())
}

/// Whether step a applies to `(i, j)`: `i_min` is in the pair or the pair
/// region cannot profitably host a third agent.
pub fn step_a_applies(
    inst: &Instance,
    state: &mut SolverState,
    info: &GlobalInfo,
    i: AgentId,
    j: AgentId,
) -> Result<bool> {
    if info.i_min == i || info.i_min == j {
        return Ok(true);
    }
    Ok(state.pair_eval(inst, i, j)?.third_gain <= info.u_min + TOL)
}

/// Total hop displacement of agents `i` and `j` moving to `(yi, yj)`.
fn displacement(
    inst: &Instance,
    state: &SolverState,
    i: AgentId,
    j: AgentId,
    yi: NodeId,
    yj: NodeId,
) -> u64 {
    let d = inst.oracle();
    d.get(state.alloc.position(i), yi) as u64 + d.get(state.alloc.position(j), yj) as u64
}

/// Assigns two ascending nodes to `i` and `j` with minimum total displacement;
/// on ties `i` takes the smaller node.
fn match_two(
    inst: &Instance,
    state: &SolverState,
    i: AgentId,
    j: AgentId,
    lo: NodeId,
    hi: NodeId,
) -> (NodeId, NodeId) {
    if displacement(inst, state, i, j, lo, hi) <= displacement(inst, state, i, j, hi, lo) {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

/// Sites ordered by agent id so Voronoi ties follow agent priority.
fn ordered(i: AgentId, j: AgentId, xi: NodeId, xj: NodeId) -> ([NodeId; 2], bool) {
    if i < j {
        ([xi, xj], false)
    } else {
        ([xj, xi], true)
    }
}

/// Applies the moves and reports whether anything differs from before.
fn commit(
    inst: &Instance,
    state: &mut SolverState,
    mut moves: [(AgentId, NodeId, Vec<NodeId>); 2],
) -> Result<bool> {
    for m in moves.iter_mut() {
        m.2.sort_unstable();
    }
    if moves
        .iter()
        .all(|(a, x, b)| state.alloc.position(*a) == *x && state.partition.block(*a) == &b[..])
    {
        return Ok(false);
    }
    let mut updates = Vec::with_capacity(2);
    for (agent, x, block) in moves {
        state.alloc.set(agent, x);
        updates.push((agent, block));
    }
    let agents: Vec<AgentId> = updates.iter().map(|u| u.0).collect();
    state.partition.replace(updates);
    for agent in agents {
        state.refresh_agent(inst, agent)?;
    }
    state.refresh_adjacency(inst);
    Ok(true)
}

/// Moves `i` and `j` to `B2(P_ij)` and re-splits `P_ij` between them. A pair
/// that already attains `M2` is left as is.
pub fn step_a(
    inst: &Instance,
    state: &mut SolverState,
    info: &GlobalInfo,
    i: AgentId,
    j: AgentId,
) -> Result<StepReport> {
    require_tree_edge(state, i, j)?;
    if !step_a_applies(inst, state, info, i, j)? {
        return Err(Error::PreconditionViolated(format!(
            "step a on ({i}, {j}) needs i_min in the pair or M3 - M2 <= u_min"
        )));
    }
    let eval = state.pair_eval(inst, i, j)?;
    let region = state.partition.union(i, j);
    let mut report = StepReport {
        step: Step::A,
        changed: false,
        merged_into: None,
        region_size: region.len(),
    };
    if state.utilities[i] + state.utilities[j] >= eval.m2 - TOL {
        return Ok(report);
    }
    let (xi, xj) = match_two(inst, state, i, j, eval.b2[0], eval.b2[1]);
    let (sites, swapped) = ordered(i, j, xi, xj);
    let mut blocks = inst.voronoi_region(&sites, &region)?;
    if swapped {
        blocks.swap(0, 1);
    }
    let [bi, bj]: [Vec<NodeId>; 2] = blocks.try_into().expect("two sites");
    report.changed = commit(inst, state, [(i, xi, bi), (j, xj, bj)])?;
    Ok(report)
}

/// Places `i`, `j` and a virtual agent `l` at `B3(P_ij)`, hands the block of
/// `l` (the one facing `i_min`) to the nearer of `i` and `j`.
pub fn step_b(
    inst: &Instance,
    state: &mut SolverState,
    info: &GlobalInfo,
    i: AgentId,
    j: AgentId,
) -> Result<StepReport> {
    require_tree_edge(state, i, j)?;
    if info.i_min == i || info.i_min == j {
        return Err(Error::PreconditionViolated(format!(
            "step b on ({i}, {j}) contains i_min"
        )));
    }
    let eval = state.pair_eval(inst, i, j)?;
    let Some(b3) = eval
        .b3
        .clone()
        .filter(|_| eval.third_gain > info.u_min + TOL)
    else {
        return Err(Error::PreconditionViolated(format!(
            "step b on ({i}, {j}) needs M3 - M2 > u_min"
        )));
    };
    let region = state.partition.union(i, j);
    let blocks = inst.voronoi_region(&b3, &region)?;
    let d = inst.oracle();
    let env = inst.env();

    // Proxy of i_min: the tree neighbor of the pair closest to x_imin.
    let proxy = state
        .tree
        .neighbors(i)
        .chain(state.tree.neighbors(j))
        .filter(|&k| k != i && k != j)
        .min_by_key(|&k| (d.get(state.alloc.position(k), info.x_imin), k))
        .ok_or_else(|| Error::PreconditionViolated("pair has no outside tree neighbor".into()))?;
    let x_proxy = state.alloc.position(proxy);
    let touches = |block: &[NodeId], agent: AgentId| {
        block.iter().any(|&c| {
            env.neighbors(c)
                .iter()
                .any(|&nb| state.partition.owner(nb) == Some(agent))
        })
    };
    let facing: Vec<usize> = (0..3).filter(|&k| touches(&blocks[k], proxy)).collect();
    let candidates = if facing.is_empty() {
        vec![0, 1, 2]
    } else {
        facing
    };
    let l = *candidates
        .iter()
        .min_by_key(|&&k| (d.get(b3[k], x_proxy), b3[k]))
        .expect("non-empty");
    let rest: Vec<usize> = (0..3).filter(|&k| k != l).collect();
    let (xi, xj) = match_two(inst, state, i, j, b3[rest[0]], b3[rest[1]]);
    let idx_of = |x: NodeId| {
        rest.iter()
            .copied()
            .find(|&k| b3[k] == x)
            .expect("assigned node")
    };
    let (ki, kj) = (idx_of(xi), idx_of(xj));

    let mut in_l = vec![false; env.node_count()];
    for &c in &blocks[l] {
        in_l[c] = true;
    }
    let adjacent_to_l = |block: &[NodeId]| {
        block
            .iter()
            .any(|&c| env.neighbors(c).iter().any(|&nb| in_l[nb]))
    };
    let mut receivers: Vec<(u32, AgentId)> = Vec::new();
    if adjacent_to_l(&blocks[ki]) {
        receivers.push((d.get(xi, b3[l]), i));
    }
    if adjacent_to_l(&blocks[kj]) {
        receivers.push((d.get(xj, b3[l]), j));
    }
    let (_, plus) = receivers
        .into_iter()
        .min()
        .ok_or_else(|| Error::PreconditionViolated("vacated block touches neither agent".into()))?;
    let mut bi = blocks[ki].clone();
    let mut bj = blocks[kj].clone();
    if plus == i {
        bi.extend_from_slice(&blocks[l]);
    } else {
        bj.extend_from_slice(&blocks[l]);
    }
    let changed = commit(inst, state, [(i, xi, bi), (j, xj, bj)])?;
    Ok(StepReport {
        step: Step::B,
        changed,
        merged_into: Some(plus),
        region_size: region.len(),
    })
}
