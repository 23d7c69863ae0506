//! Comparison algorithms: Voronoi best response (VVP), pairwise coordination
//! (SOTA), centralized greedy (CGR) and the brute-force optimum (OPT).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coverage::{Allocation, Instance, Partition};
use crate::{AgentId, Error, NodeId, Result, TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub allocation: Allocation,
    pub objective: f64,
    pub iterations: u64,
    pub converged: bool,
    /// Seconds.
    pub wallclock: f64,
}

impl AlgorithmResult {
    fn finish(
        inst: &Instance,
        allocation: Allocation,
        iterations: u64,
        converged: bool,
        start: Instant,
    ) -> Result<Self> {
        Ok(AlgorithmResult {
            objective: inst.objective(allocation.positions())?,
            allocation,
            iterations,
            converged,
            wallclock: start.elapsed().as_secs_f64(),
        })
    }
}

/// Index of the largest score; ties within `1e-12` go to the earliest entry.
fn argmax_first(scores: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b + 1e-12) {
            best = Some((k, s));
        }
    }
    best
}

/// Each pass visits agents in ascending id; an agent moves to the node of its
/// own Voronoi cell with the highest utility when that strictly beats its
/// current utility. Cells are recomputed after every move.
pub fn vvp_run(inst: &Instance, max_passes: u64, initial: Allocation) -> Result<AlgorithmResult> {
    let start = Instant::now();
    initial.validate(inst.node_count())?;
    let mut alloc = initial;
    let mut partition = inst.voronoi(&alloc)?;
    let mut passes = 0;
    let mut converged = false;
    while passes < max_passes {
        passes += 1;
        let mut changed = false;
        for i in 0..alloc.len() {
            let view = inst.view(partition.block(i))?;
            let current = inst
                .utility_in(&view, alloc.position(i))
                .expect("agent in its cell");
            let (k, best) = argmax_first(
                view.nodes()
                    .iter()
                    .map(|&y| inst.utility_in(&view, y).expect("node in view")),
            )
            .expect("cells are non-empty");
            if best > current + TOL {
                alloc.set(i, view.nodes()[k]);
                partition = inst.voronoi(&alloc)?;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    AlgorithmResult::finish(inst, alloc, passes, converged, start)
}

fn sum_utilities(
    inst: &Instance,
    alloc: &Allocation,
    partition: &Partition,
    agents: &[AgentId],
) -> Result<f64> {
    agents
        .iter()
        .map(|&a| inst.utility(a, alloc.position(a), partition.block(a)))
        .sum()
}

/// Every agent is activated once, in ascending id. The active agent first
/// tries the node of its cell that maximizes its own utility plus that of its
/// current neighbors. Without a strict improvement it looks for a partner,
/// nearest in the agent adjacency graph first: the agent relocates inside the
/// joint region and the partner takes the vacated node, and the first move
/// that strictly raises their summed utility is applied.
pub fn sota_run(inst: &Instance, initial: Allocation) -> Result<AlgorithmResult> {
    let start = Instant::now();
    initial.validate(inst.node_count())?;
    let n = initial.len();
    let mut alloc = initial;
    let mut partition = inst.voronoi(&alloc)?;
    let mut occupied = vec![false; inst.node_count()];
    for &x in alloc.positions() {
        occupied[x] = true;
    }
    for i in 0..n {
        let adjacency = inst.agent_adjacency(&partition);
        let mut group = vec![i];
        group.extend_from_slice(adjacency.neighbors(i));
        let current = sum_utilities(inst, &alloc, &partition, &group)?;
        let cell = partition.block(i).to_vec();
        let mut best: Option<(f64, Allocation, Partition)> = None;
        for &y in &cell {
            if y == alloc.position(i) {
                continue;
            }
            let mut cand = alloc.clone();
            cand.set(i, y);
            let p = inst.voronoi(&cand)?;
            let score = sum_utilities(inst, &cand, &p, &group)?;
            if best.as_ref().is_none_or(|(b, _, _)| score > b + 1e-12) {
                best = Some((score, cand, p));
            }
        }
        if let Some((score, cand, p)) = best {
            if score > current + TOL {
                occupied[alloc.position(i)] = false;
                occupied[cand.position(i)] = true;
                alloc = cand;
                partition = p;
                continue;
            }
        }
        // Partner search by hop distance, then id.
        let hops = adjacency.hops_from(i);
        let mut partners: Vec<AgentId> = (0..n).filter(|&j| j != i).collect();
        partners.sort_by_key(|&j| (hops[j], j));
        'partners: for j in partners {
            let pair = [i, j];
            let current = sum_utilities(inst, &alloc, &partition, &pair)?;
            let (xi, xj) = (alloc.position(i), alloc.position(j));
            for y in partition.union(i, j) {
                if y == xi || y == xj || occupied[y] {
                    continue;
                }
                let mut cand = alloc.clone();
                cand.set(i, y);
                cand.set(j, xi);
                let p = inst.voronoi(&cand)?;
                if sum_utilities(inst, &cand, &p, &pair)? > current + TOL {
                    occupied[xj] = false;
                    occupied[y] = true;
                    alloc = cand;
                    partition = p;
                    break 'partners;
                }
            }
        }
    }
    AlgorithmResult::finish(inst, alloc, n as u64, true, start)
}

/// Places `n` agents one at a time on the free node with the largest marginal
/// gain, ties to the lowest node id.
pub fn cgr_run(inst: &Instance, n: usize) -> Result<AlgorithmResult> {
    let start = Instant::now();
    let m = inst.node_count();
    if n == 0 {
        return Err(Error::EmptyAllocation);
    }
    if n > m {
        return Err(Error::TooManyAgents {
            agents: n,
            nodes: m,
        });
    }
    let env = inst.env();
    let g = inst.decay();
    let d = inst.oracle();
    let mut cover = vec![0.0f64; m];
    let mut occupied = vec![false; m];
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let gains = (0..m).map(|y| {
            if occupied[y] {
                return f64::NEG_INFINITY;
            }
            (0..m)
                .map(|c| (env.weight(c) * g.eval(d.get(y, c)) - cover[c]).max(0.0))
                .sum()
        });
        let (y, _) = argmax_first(gains).expect("free node exists");
        occupied[y] = true;
        positions.push(y);
        for (c, best) in cover.iter_mut().enumerate() {
            *best = best.max(env.weight(c) * g.eval(d.get(y, c)));
        }
    }
    let alloc = Allocation::new(positions, m)?;
    AlgorithmResult::finish(inst, alloc, n as u64, true, start)
}

pub const DEFAULT_BRUTE_FORCE_BUDGET: u128 = 10_000_000;

/// `C(m, n)`, saturating.
pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let n = n.min(m - n);
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc.saturating_mul((m - k) as u128) / (k as u128 + 1);
    }
    acc
}

/// Exhaustive search over all `C(m, n)` node sets. Returns the
/// lexicographically least maximizer.
pub fn opt_bruteforce(inst: &Instance, n: usize, budget: u128) -> Result<AlgorithmResult> {
    let start = Instant::now();
    let m = inst.node_count();
    if n == 0 {
        return Err(Error::EmptyAllocation);
    }
    if n > m {
        return Err(Error::TooManyAgents {
            agents: n,
            nodes: m,
        });
    }
    let needed = binomial(m, n);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let all: Vec<NodeId> = (0..m).collect();
    let view = crate::coverage::RegionView::new(
        inst.env(),
        inst.oracle(),
        &all,
        crate::coverage::RegionMetric::Global,
    )?;
    let placement = crate::coverage::best_placement(inst.env(), inst.decay(), &view, &[], n)?;
    let alloc = Allocation::new(placement.nodes, m)?;
    AlgorithmResult::finish(inst, alloc, needed as u64, true, start)
}
