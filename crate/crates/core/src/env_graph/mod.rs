//! Environment model: connected node-weighted graphs with unit-length edges.

mod decay;
mod distance;
pub mod generators;
pub mod layouts;
pub mod orlib;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result};

pub use decay::Decay;
pub use distance::{DistanceOracle, UNREACHABLE};
pub use generators::{
    gen_bridge, gen_chain, gen_grid, gen_indoor, gen_lattice3d, gen_random_maze,
    gen_random_maze_with, gen_star, gen_tree, MazeParams,
};

/// Weight given to nodes outside the point-of-interest set unless overridden.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Provenance attached to a graph for reporting and serialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Connected, node-weighted graph. Every edge has unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvGraph {
    weights: Vec<f64>,
    adj: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
    valued: Vec<NodeId>,
    coords: Option<Vec<Vec<i32>>>,
    meta: GraphMeta,
}

impl EnvGraph {
    /// Validates and builds a graph. Duplicate edges are merged; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn build(nodes: usize, edges: &[(NodeId, NodeId)], weights: Vec<f64>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidParams("graph needs at least one node".into()));
        }
        if weights.len() != nodes {
            return Err(Error::InvalidParams(format!(
                "{} weights for {} nodes",
                weights.len(),
                nodes
            )));
        }
        for (node, &weight) in weights.iter().enumerate() {
            if weight < 0.0 || !weight.is_finite() {
                return Err(Error::NegativeWeight { node, weight });
            }
        }
        let mut norm: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= nodes || b >= nodes || a == b {
                return Err(Error::InvalidEdge(a, b));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); nodes];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let valued = valued_set(&weights);
        let graph = EnvGraph {
            weights,
            adj,
            edges: norm,
            valued,
            coords: None,
            meta: GraphMeta::default(),
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adj[node]
    }

    pub fn weight(&self, node: NodeId) -> f64 {
        self.weights[node]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes with weight exactly 1 (the points of interest).
    pub fn valued(&self) -> &[NodeId] {
        &self.valued
    }

    pub fn coords(&self) -> Option<&[Vec<i32>]> {
        self.coords.as_deref()
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn with_coords(mut self, coords: Vec<Vec<i32>>) -> Result<Self> {
        if coords.len() != self.node_count() {
            return Err(Error::InvalidParams(
                "one coordinate per node required".into(),
            ));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn with_meta(mut self, meta: GraphMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Replaces all weights. Connectivity is unaffected.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.node_count() {
            return Err(Error::InvalidParams("one weight per node required".into()));
        }
        for (node, &weight) in weights.iter().enumerate() {
            if weight < 0.0 || !weight.is_finite() {
                return Err(Error::NegativeWeight { node, weight });
            }
        }
        self.valued = valued_set(&weights);
        self.weights = weights;
        Ok(self)
    }

    /// Sets every node in `valued` to 1 and every other node to `epsilon`.
    pub fn with_valued_nodes(self, valued: &[NodeId], epsilon: f64) -> Result<Self> {
        let mut weights = vec![epsilon; self.node_count()];
        for &v in valued {
            if v >= weights.len() {
                return Err(Error::InvalidParams(format!(
                    "valued node {v} out of range"
                )));
            }
            weights[v] = 1.0;
        }
        self.with_weights(weights)
    }

    /// Rewrites the weight of every non-valued node.
    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        let valued = self.valued.clone();
        self.with_valued_nodes(&valued, epsilon)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    fn component_count(&self) -> usize {
        let m = self.node_count();
        let mut seen = vec![false; m];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    /// Whether `nodes` induce a connected subgraph. The empty set is not connected.
    pub fn induces_connected(&self, nodes: &[NodeId]) -> bool {
        let Some(&start) = nodes.first() else {
            return false;
        };
        let mut member = vec![false; self.node_count()];
        for &n in nodes {
            member[n] = true;
        }
        let mut seen = vec![false; self.node_count()];
        seen[start] = true;
        let mut reached = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if member[v] && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == nodes.len()
    }

    /// Hop distances from `src` inside the subgraph induced by `mask`
    /// (or the whole graph when `mask` is `None`). Unreached nodes keep
    /// [`UNREACHABLE`].
    pub fn bfs(&self, src: NodeId, mask: Option<&[bool]>, out: &mut Vec<u32>) {
        out.clear();
        out.resize(self.node_count(), UNREACHABLE);
        out[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let next = out[u] + 1;
            for &v in &self.adj[u] {
                if out[v] == UNREACHABLE && mask.is_none_or(|m| m[v]) {
                    out[v] = next;
                    queue.push_back(v);
                }
            }
        }
    }

    /// Articulation points (cut vertices), ascending.
    pub fn articulation_points(&self) -> Vec<NodeId> {
        let m = self.node_count();
        let mut disc = vec![usize::MAX; m];
        let mut low = vec![0usize; m];
        let mut is_cut = vec![false; m];
        let mut timer = 0;
        // Iterative DFS: (node, parent, next neighbor index, child count).
        let mut stack: Vec<(NodeId, Option<NodeId>, usize, usize)> = Vec::new();
        disc[0] = timer;
        low[0] = timer;
        timer += 1;
        stack.push((0, None, 0, 0));
        while let Some(top) = stack.last_mut() {
            let (u, parent, idx, _) = *top;
            if idx < self.adj[u].len() {
                top.2 += 1;
                let v = self.adj[u][idx];
                if Some(v) == parent {
                    continue;
                }
                if disc[v] == usize::MAX {
                    top.3 += 1;
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(u), 0, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                let (_, _, _, children) = stack.pop().unwrap();
                match parent {
                    Some(p) => {
                        low[p] = low[p].min(low[u]);
                        if stack.len() > 1 && low[u] >= disc[p] {
                            is_cut[p] = true;
                        }
                    }
                    None => {
                        if children > 1 {
                            is_cut[u] = true;
                        }
                    }
                }
            }
        }
        (0..m).filter(|&n| is_cut[n]).collect()
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: (0..self.node_count())
                .map(|id| NodeRecord {
                    id,
                    weight: self.weights[id],
                    coord: self.coords.as_ref().map(|c| c[id].clone()),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self> {
        let m = doc.nodes.len();
        let mut weights = vec![0.0; m];
        let mut coords: Vec<Option<Vec<i32>>> = vec![None; m];
        let mut seen = vec![false; m];
        for node in doc.nodes {
            if node.id >= m || seen[node.id] {
                return Err(Error::InvalidParams(format!("bad node id {}", node.id)));
            }
            seen[node.id] = true;
            weights[node.id] = node.weight;
            coords[node.id] = node.coord;
        }
        let edges: Vec<(NodeId, NodeId)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = EnvGraph::build(m, &edges, weights)?.with_meta(doc.meta);
        if coords.iter().all(Option::is_some) {
            graph = graph.with_coords(coords.into_iter().map(Option::unwrap).collect())?;
        }
        Ok(graph)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }
}

fn valued_set(weights: &[f64]) -> Vec<NodeId> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == 1.0)
        .map(|(i, _)| i)
        .collect()
}

/// On-disk graph format: `{nodes:[{id,weight}], edges:[[i,j]], meta:{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[NodeId; 2]>,
    #[serde(default)]
    pub meta: GraphMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<Vec<i32>>,
}
