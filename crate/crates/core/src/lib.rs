//! Multi-agent coverage control on discrete graph environments.
//!
//! Agents are placed on the nodes of a connected, node-weighted graph and the
//! team objective is `G(x) = sum_c v_c * g(dist(c, nearest agent))`. The crate
//! provides:
//!
//! * [`env_graph`]: environments, hop-distance oracle, shape generators and the
//!   OR-library p-median reader.
//! * [`coverage`]: objective and utility evaluation, geodesic Voronoi
//!   partitions, agent adjacency and exhaustive k-agent placement.
//! * [`nbo`]: the neighborhood-optimum solver with its communication tree,
//!   state classification and potential-function certificate.
//! * [`baselines`]: Voronoi best response, pairwise coordination, centralized
//!   greedy and the brute-force optimum.
//! * [`harness`]: seeded trials, sweeps, summaries, reports and validation.

pub mod baselines;
pub mod coverage;
pub mod env_graph;
pub mod error;
pub mod harness;
pub mod nbo;

pub use error::{Error, Result};

/// Absolute tolerance for comparisons between utility-scale quantities.
pub const TOL: f64 = 1e-9;

/// Node index inside an [`env_graph::EnvGraph`].
pub type NodeId = usize;

/// Agent index, `0..n`.
pub type AgentId = usize;
