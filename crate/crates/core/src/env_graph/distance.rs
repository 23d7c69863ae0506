use crate::NodeId;

use super::EnvGraph;

/// Distance value for nodes that a search did not reach.
pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs hop distances, computed by one breadth-first search per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOracle {
    m: usize,
    dist: Vec<u32>,
    d_max: u32,
}

impl DistanceOracle {
    pub fn new(env: &EnvGraph) -> Self {
        let m = env.node_count();
        let mut dist = Vec::with_capacity(m * m);
        let mut row = Vec::new();
        for src in 0..m {
            env.bfs(src, None, &mut row);
            dist.extend_from_slice(&row);
        }
        let d_max = dist.iter().copied().max().unwrap_or(0);
        debug_assert!(d_max != UNREACHABLE, "environment graphs are connected");
        DistanceOracle { m, dist, d_max }
    }

    #[inline]
    pub fn get(&self, a: NodeId, b: NodeId) -> u32 {
        self.dist[a * self.m + b]
    }

    pub fn row(&self, a: NodeId) -> &[u32] {
        &self.dist[a * self.m..(a + 1) * self.m]
    }

    /// Diameter of the environment.
    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn node_count(&self) -> usize {
        self.m
    }
}
