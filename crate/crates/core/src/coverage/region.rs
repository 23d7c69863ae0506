use serde::{Deserialize, Serialize};

use crate::env_graph::{Decay, DistanceOracle, EnvGraph, UNREACHABLE};
use crate::{Error, NodeId, Result};

/// Metric used when evaluating utilities and placements inside a region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionMetric {
    /// Hop distance inside the subgraph induced by the region.
    #[default]
    Induced,
    /// Hop distance in the whole environment.
    Global,
}

/// A node subset with a local index and a dense distance matrix.
#[derive(Debug, Clone)]
pub struct RegionView {
    nodes: Vec<NodeId>,
    dist: Vec<u32>,
}

impl RegionView {
    /// `nodes` may come in any order; the view keeps them sorted.
    pub fn new(
        env: &EnvGraph,
        oracle: &DistanceOracle,
        nodes: &[NodeId],
        metric: RegionMetric,
    ) -> Result<Self> {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::RegionTooSmall {
                region: 0,
                needed: 1,
            });
        }
        let r = nodes.len();
        let mut dist = Vec::with_capacity(r * r);
        match metric {
            RegionMetric::Global => {
                for &a in &nodes {
                    dist.extend(nodes.iter().map(|&b| oracle.get(a, b)));
                }
            }
            RegionMetric::Induced => {
                let mut mask = vec![false; env.node_count()];
                for &n in &nodes {
                    mask[n] = true;
                }
                let mut row = Vec::new();
                for &a in &nodes {
                    env.bfs(a, Some(&mask), &mut row);
                    dist.extend(nodes.iter().map(|&b| row[b]));
                }
            }
        }
        Ok(RegionView { nodes, dist })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn local(&self, node: NodeId) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.local(node).is_some()
    }

    /// Distance between local indices.
    #[inline]
    pub fn dist_local(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.nodes.len() + b]
    }

    /// Whether every pair of region nodes is mutually reachable.
    pub fn is_connected(&self) -> bool {
        self.dist.iter().all(|&d| d != UNREACHABLE)
    }

    /// Per-node coverage value `v_c * g(d)` seen from local node `a`.
    pub(crate) fn gain(&self, env: &EnvGraph, g: &Decay, a: usize, c: usize) -> f64 {
        let d = self.dist_local(a, c);
        if d == UNREACHABLE {
            0.0
        } else {
            env.weight(self.nodes[c]) * g.eval(d)
        }
    }
}
