//! Coverage objective, per-block utilities, geodesic Voronoi partitions and
//! exhaustive k-agent placement.

mod placement;
mod region;

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env_graph::{Decay, DistanceOracle, EnvGraph, UNREACHABLE};
use crate::{AgentId, Error, NodeId, Result};

pub use placement::{best_placement, marginal_gain, Placement};
pub use region::{RegionMetric, RegionView};

/// Exclusive assignment of agents to nodes, indexed by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<NodeId>);

impl Allocation {
    pub fn new(positions: Vec<NodeId>, node_count: usize) -> Result<Self> {
        let alloc = Allocation(positions);
        alloc.validate(node_count)?;
        Ok(alloc)
    }

    /// `n` distinct nodes drawn uniformly at random.
    pub fn random(node_count: usize, n: usize, rng: &mut impl Rng) -> Result<Self> {
        if n > node_count {
            return Err(Error::TooManyAgents {
                agents: n,
                nodes: node_count,
            });
        }
        Ok(Allocation(
            rand::seq::index::sample(rng, node_count, n).into_vec(),
        ))
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptyAllocation);
        }
        let mut seen = vec![false; node_count];
        for (agent, &node) in self.0.iter().enumerate() {
            if node >= node_count {
                return Err(Error::AgentOutsideRegion { agent, node });
            }
            if std::mem::replace(&mut seen[node], true) {
                return Err(Error::NonExclusive(node));
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, agent: AgentId) -> NodeId {
        self.0[agent]
    }

    pub(crate) fn set(&mut self, agent: AgentId, node: NodeId) {
        self.0[agent] = node;
    }

    pub fn into_inner(self) -> Vec<NodeId> {
        self.0
    }
}

/// Disjoint blocks of nodes, one per agent, plus the reverse owner map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<NodeId>>,
    owner: Vec<Option<AgentId>>,
}

impl Partition {
    /// Blocks are sorted; overlapping blocks are rejected.
    pub fn from_blocks(mut blocks: Vec<Vec<NodeId>>, node_count: usize) -> Result<Self> {
        let mut owner = vec![None; node_count];
        for (agent, block) in blocks.iter_mut().enumerate() {
            block.sort_unstable();
            for &node in block.iter() {
                if node >= node_count {
                    return Err(Error::AgentOutsideRegion { agent, node });
                }
                if owner[node].replace(agent).is_some() {
                    return Err(Error::NonExclusive(node));
                }
            }
        }
        Ok(Partition { blocks, owner })
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block(&self, agent: AgentId) -> &[NodeId] {
        &self.blocks[agent]
    }

    pub fn owner(&self, node: NodeId) -> Option<AgentId> {
        self.owner[node]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of two blocks, sorted.
    pub fn union(&self, i: AgentId, j: AgentId) -> Vec<NodeId> {
        let mut nodes = [self.block(i), self.block(j)].concat();
        nodes.sort_unstable();
        nodes
    }

    /// Replaces the blocks of the listed agents. The new blocks must cover
    /// exactly the nodes the old ones held.
    pub(crate) fn replace(&mut self, updates: Vec<(AgentId, Vec<NodeId>)>) {
        for (agent, _) in &updates {
            for &node in &self.blocks[*agent] {
                self.owner[node] = None;
            }
        }
        for (agent, mut block) in updates {
            block.sort_unstable();
            for &node in &block {
                debug_assert!(self.owner[node].is_none());
                self.owner[node] = Some(agent);
            }
            self.blocks[agent] = block;
        }
    }

    /// Checks that blocks cover every node, hold their agent and are connected.
    pub fn validate(&self, env: &EnvGraph, alloc: &Allocation) -> Result<()> {
        if self.blocks.len() != alloc.len() {
            return Err(Error::InvalidParams(format!(
                "{} blocks for {} agents",
                self.blocks.len(),
                alloc.len()
            )));
        }
        if let Some(node) = self.owner.iter().position(Option::is_none) {
            return Err(Error::PreconditionViolated(format!(
                "node {node} belongs to no block"
            )));
        }
        for (agent, block) in self.blocks.iter().enumerate() {
            let node = alloc.position(agent);
            if self.owner[node] != Some(agent) {
                return Err(Error::AgentOutsideBlock { agent, node });
            }
            if !env.induces_connected(block) {
                return Err(Error::PreconditionViolated(format!(
                    "block of agent {agent} is not connected"
                )));
            }
        }
        Ok(())
    }
}

/// Agents whose blocks are joined by at least one environment edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentAdjacency {
    neighbors: Vec<Vec<AgentId>>,
}

impl AgentAdjacency {
    pub fn from_edges(n: usize, edges: &[(AgentId, AgentId)]) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        AgentAdjacency { neighbors }
    }

    pub fn agent_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.neighbors[agent]
    }

    pub fn contains(&self, a: AgentId, b: AgentId) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `src`; unreachable agents get `usize::MAX`.
    pub fn hops_from(&self, src: AgentId) -> Vec<usize> {
        let mut hops = vec![usize::MAX; self.neighbors.len()];
        hops[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(a) = queue.pop_front() {
            for &b in &self.neighbors[a] {
                if hops[b] == usize::MAX {
                    hops[b] = hops[a] + 1;
                    queue.push_back(b);
                }
            }
        }
        hops
    }

    pub fn is_connected(&self) -> bool {
        self.neighbors.is_empty() || self.hops_from(0).iter().all(|&h| h != usize::MAX)
    }
}

/// An environment with its distance oracle, decay function and region metric.
#[derive(Debug, Clone)]
pub struct Instance {
    env: EnvGraph,
    oracle: DistanceOracle,
    decay: Decay,
    metric: RegionMetric,
}

impl Instance {
    pub fn new(env: EnvGraph, decay: Decay, metric: RegionMetric) -> Self {
        let oracle = DistanceOracle::new(&env);
        Instance {
            env,
            oracle,
            decay,
            metric,
        }
    }

    pub fn with_defaults(env: EnvGraph) -> Self {
        Self::new(env, Decay::default(), RegionMetric::default())
    }

    pub fn env(&self) -> &EnvGraph {
        &self.env
    }

    pub fn oracle(&self) -> &DistanceOracle {
        &self.oracle
    }

    pub fn decay(&self) -> &Decay {
        &self.decay
    }

    pub fn metric(&self) -> RegionMetric {
        self.metric
    }

    pub fn node_count(&self) -> usize {
        self.env.node_count()
    }

    /// `G(x)` over the whole environment.
    pub fn objective(&self, positions: &[NodeId]) -> Result<f64> {
        let all: Vec<NodeId> = (0..self.node_count()).collect();
        self.region_objective(positions, &all)
    }

    /// `sum_{c in region} v_c * g(min_i dist(x_i, c))` with environment distances.
    pub fn region_objective(&self, positions: &[NodeId], region: &[NodeId]) -> Result<f64> {
        if positions.is_empty() {
            return Err(Error::EmptyAllocation);
        }
        Ok(region
            .iter()
            .map(|&c| {
                let d = positions
                    .iter()
                    .map(|&x| self.oracle.get(x, c))
                    .min()
                    .expect("non-empty");
                self.env.weight(c) * self.decay.eval(d)
            })
            .sum())
    }

    pub fn view(&self, region: &[NodeId]) -> Result<RegionView> {
        RegionView::new(&self.env, &self.oracle, region, self.metric)
    }

    /// Utility of an agent at `x` owning `block`.
    pub fn utility(&self, agent: AgentId, x: NodeId, block: &[NodeId]) -> Result<f64> {
        let view = self.view(block)?;
        self.utility_in(&view, x)
            .ok_or(Error::AgentOutsideBlock { agent, node: x })
    }

    /// Utility of an agent at `x` owning the nodes of `view`; `None` when `x`
    /// is outside.
    pub fn utility_in(&self, view: &RegionView, x: NodeId) -> Option<f64> {
        let a = view.local(x)?;
        Some(
            (0..view.len())
                .map(|c| view.gain(&self.env, &self.decay, a, c))
                .sum(),
        )
    }

    pub fn utilities(&self, alloc: &Allocation, partition: &Partition) -> Result<Vec<f64>> {
        (0..alloc.len())
            .map(|i| self.utility(i, alloc.position(i), partition.block(i)))
            .collect()
    }

    /// Geodesic Voronoi partition of the whole environment.
    pub fn voronoi(&self, alloc: &Allocation) -> Result<Partition> {
        let all: Vec<NodeId> = (0..self.node_count()).collect();
        let blocks = self.voronoi_region(alloc.positions(), &all)?;
        Partition::from_blocks(blocks, self.node_count())
    }

    /// Splits `region` among `sites` by hop distance inside the region. Ties go
    /// to the site listed first. Returns one sorted block per site.
    pub fn voronoi_region(&self, sites: &[NodeId], region: &[NodeId]) -> Result<Vec<Vec<NodeId>>> {
        voronoi_region(&self.env, sites, region)
    }

    pub fn agent_adjacency(&self, partition: &Partition) -> AgentAdjacency {
        agent_adjacency(&self.env, partition)
    }

    pub fn best_placement(
        &self,
        region: &[NodeId],
        fixed: &[NodeId],
        k: usize,
    ) -> Result<Placement> {
        let view = self.view(region)?;
        best_placement(&self.env, &self.decay, &view, fixed, k)
    }

    pub fn marginal_gain(&self, region: &[NodeId], fixed: &[NodeId], k: usize) -> Result<f64> {
        self.best_placement(region, fixed, k).map(|p| p.gain)
    }
}

/// See [`Instance::voronoi_region`].
pub fn voronoi_region(
    env: &EnvGraph,
    sites: &[NodeId],
    region: &[NodeId],
) -> Result<Vec<Vec<NodeId>>> {
    if sites.is_empty() {
        return Err(Error::EmptyAllocation);
    }
    let m = env.node_count();
    let mut member = vec![false; m];
    for &c in region {
        member[c] = true;
    }
    let mut dist = vec![UNREACHABLE; m];
    let mut label = vec![usize::MAX; m];
    let mut frontier = Vec::with_capacity(sites.len());
    for (agent, &node) in sites.iter().enumerate() {
        if node >= m || !member[node] {
            return Err(Error::AgentOutsideRegion { agent, node });
        }
        if dist[node] == 0 {
            return Err(Error::NonExclusive(node));
        }
        dist[node] = 0;
        label[node] = agent;
        frontier.push(node);
    }
    // Layered search: a node's label is the smallest label among its
    // predecessors, which is the smallest id among its nearest sites.
    let mut d = 0;
    let mut next = Vec::new();
    while !frontier.is_empty() {
        for &u in &frontier {
            for &v in env.neighbors(u) {
                if !member[v] {
                    continue;
                }
                if dist[v] == UNREACHABLE {
                    dist[v] = d + 1;
                    label[v] = label[u];
                    next.push(v);
                } else if dist[v] == d + 1 && label[u] < label[v] {
                    label[v] = label[u];
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
        d += 1;
    }
    let mut blocks = vec![Vec::new(); sites.len()];
    let mut sorted = region.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for c in sorted {
        if label[c] == usize::MAX {
            return Err(Error::PreconditionViolated(format!(
                "node {c} is not reachable from any site inside the region"
            )));
        }
        blocks[label[c]].push(c);
    }
    Ok(blocks)
}

/// Agents `i != j` are adjacent when an environment edge joins their blocks.
pub fn agent_adjacency(env: &EnvGraph, partition: &Partition) -> AgentAdjacency {
    let edges: Vec<(AgentId, AgentId)> = env
        .edges()
        .iter()
        .filter_map(|&(a, b)| match (partition.owner(a), partition.owner(b)) {
            (Some(i), Some(j)) if i != j => Some((i, j)),
            _ => None,
        })
        .collect();
    AgentAdjacency::from_edges(partition.len(), &edges)
}
