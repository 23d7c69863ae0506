use std::collections::VecDeque;

use serde::Serialize;

use crate::coverage::AgentAdjacency;
use crate::{AgentId, Error, Result};

/// Spanning tree over the agent adjacency graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommTree {
    parent: Vec<Option<AgentId>>,
    children: Vec<Vec<AgentId>>,
    root: AgentId,
}

impl CommTree {
    /// Builds a tree from a parent vector. Exactly one entry must be `None`
    /// and every agent must reach it.
    pub fn from_parents(parent: Vec<Option<AgentId>>) -> Result<Self> {
        let n = parent.len();
        let roots: Vec<AgentId> = (0..n).filter(|&a| parent[a].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidParams(format!(
                "tree needs exactly one root, found {}",
                roots.len()
            )));
        };
        let mut children = vec![Vec::new(); n];
        for (a, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n || p == a {
                    return Err(Error::InvalidParams(format!(
                        "bad parent {p} for agent {a}"
                    )));
                }
                children[p].push(a);
            }
        }
        let tree = CommTree {
            parent,
            children,
            root,
        };
        let reached = tree.bfs_order().len();
        if reached != n {
            return Err(Error::InvalidParams(
                "parent vector contains a cycle".into(),
            ));
        }
        Ok(tree)
    }

    pub fn root(&self) -> AgentId {
        self.root
    }

    pub fn parent(&self, agent: AgentId) -> Option<AgentId> {
        self.parent[agent]
    }

    pub fn parents(&self) -> &[Option<AgentId>] {
        &self.parent
    }

    /// Children in ascending id.
    pub fn children(&self, agent: AgentId) -> &[AgentId] {
        &self.children[agent]
    }

    pub fn agent_count(&self) -> usize {
        self.parent.len()
    }

    /// Parent and children of `agent`.
    pub fn neighbors(&self, agent: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.parent[agent]
            .into_iter()
            .chain(self.children[agent].iter().copied())
    }

    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        self.parent[a] == Some(b) || self.parent[b] == Some(a)
    }

    /// `(child, parent)` pairs in ascending child id.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(a, p)| p.map(|p| (a, p)))
            .collect()
    }

    /// Whether every tree edge is an adjacency edge.
    pub fn is_subgraph_of(&self, adjacency: &AgentAdjacency) -> bool {
        self.edges().iter().all(|&(a, b)| adjacency.contains(a, b))
    }

    fn bfs_order(&self) -> Vec<AgentId> {
        let mut order = vec![self.root];
        let mut k = 0;
        while k < order.len() && order.len() <= self.parent.len() {
            order.extend_from_slice(&self.children[order[k]]);
            k += 1;
        }
        order
    }
}

/// Breadth-first tree rooted at `root`, exploring neighbors in ascending id.
/// Also returns the number of adjacency edges examined.
pub fn build_comm_tree(adjacency: &AgentAdjacency, root: AgentId) -> Result<(CommTree, u64)> {
    let n = adjacency.agent_count();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(a) = queue.pop_front() {
        for &b in adjacency.neighbors(a) {
            if !seen[b] {
                seen[b] = true;
                parent[b] = Some(a);
                queue.push_back(b);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::DisconnectedAdjacency);
    }
    let tree = CommTree::from_parents(parent)?;
    Ok((tree, adjacency.edge_count() as u64))
}
