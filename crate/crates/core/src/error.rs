use std::path::PathBuf;

use thiserror::Error;

use crate::{AgentId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(NodeId, NodeId),
    #[error("node {node} has negative weight {weight}")]
    NegativeWeight { node: NodeId, weight: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("allocation is empty")]
    EmptyAllocation,
    #[error("allocation is not exclusive: node {0} is used twice")]
    NonExclusive(NodeId),
    #[error("agent {agent} at node {node} lies outside its block")]
    AgentOutsideBlock { agent: AgentId, node: NodeId },
    #[error("agent {agent} at node {node} lies outside the region")]
    AgentOutsideRegion { agent: AgentId, node: NodeId },
    #[error("region of {region} nodes cannot hold {needed} agents")]
    RegionTooSmall { region: usize, needed: usize },
    #[error("agent adjacency graph is disconnected")]
    DisconnectedAdjacency,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: u64 },
    #[error("invariant breach: {message}")]
    InvariantBreach {
        message: String,
        /// JSON snapshot of the solver state at the time of the breach.
        dump: String,
    },
    #[error("{agents} agents do not fit on {nodes} nodes")]
    TooManyAgents { agents: usize, nodes: usize },
    #[error("brute force needs {needed} allocations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("no input records")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
