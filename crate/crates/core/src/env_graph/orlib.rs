//! Reader for OR-library p-median instances (`pmed1` .. `pmed40`).
//!
//! Format: a header `m_nodes m_edges p`, then one `i j cost` line per edge
//! with 1-indexed endpoints. Edge costs become hop counts: an edge of
//! rounded cost `h > 1` is expanded into a chain of `h - 1` intermediate
//! nodes so the unit-edge metric approximates the input metric.

use std::path::Path;

use serde_json::json;

use super::{EnvGraph, GraphMeta, DEFAULT_EPSILON};
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OrlibInstance {
    pub nodes: usize,
    pub p: usize,
    /// 0-indexed endpoints and integer cost.
    pub edges: Vec<(NodeId, NodeId, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrlibOptions {
    /// Hop count of an edge is `max(1, round(cost / cost_scale))`.
    pub cost_scale: f64,
    /// Whether the original instance nodes are valued; otherwise all nodes
    /// get `epsilon`.
    pub value_instance_nodes: bool,
    pub epsilon: f64,
}

impl Default for OrlibOptions {
    fn default() -> Self {
        OrlibOptions {
            cost_scale: 1.0,
            value_instance_nodes: true,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

fn parse_fields<const N: usize>(line: &str, lineno: usize) -> Result<[u64; N]> {
    let mut out = [0u64; N];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected {N} integers"),
        })?;
        *slot = tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("not an integer: {tok:?}"),
        })?;
    }
    if let Some(extra) = it.next() {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("unexpected trailing token {extra:?}"),
        });
    }
    Ok(out)
}

pub fn parse_orlib(text: &str) -> Result<OrlibInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let [nodes, n_edges, p] = parse_fields::<3>(header, hline)?;
    let nodes = nodes as usize;
    let mut edges = Vec::with_capacity(n_edges as usize);
    let mut last_line = hline;
    for _ in 0..n_edges {
        let (lineno, line) = lines.next().ok_or(Error::Parse {
            line: last_line + 1,
            msg: format!("expected {n_edges} edge lines, found {}", edges.len()),
        })?;
        last_line = lineno;
        let [i, j, cost] = parse_fields::<3>(line, lineno)?;
        let (i, j) = (i as usize, j as usize);
        if i == 0 || j == 0 || i > nodes || j > nodes {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node id out of range 1..={nodes}"),
            });
        }
        edges.push((i - 1, j - 1, cost));
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lineno,
            msg: "trailing data after edge list".into(),
        });
    }
    Ok(OrlibInstance {
        nodes,
        p: p as usize,
        edges,
    })
}

impl OrlibInstance {
    /// Unit-edge environment. Self-loops are dropped; for repeated node pairs
    /// the last edge wins, following the OR-library convention.
    pub fn to_graph(&self, opts: OrlibOptions) -> Result<EnvGraph> {
        if opts.cost_scale.is_nan() || opts.cost_scale <= 0.0 {
            return Err(Error::InvalidParams("cost_scale must be positive".into()));
        }
        let mut last: std::collections::BTreeMap<(NodeId, NodeId), u64> = Default::default();
        for &(i, j, cost) in &self.edges {
            if i != j {
                last.insert((i.min(j), i.max(j)), cost);
            }
        }
        let mut m = self.nodes;
        let mut edges = Vec::new();
        for (&(i, j), &cost) in &last {
            let hops = ((cost as f64 / opts.cost_scale).round() as usize).max(1);
            let mut prev = i;
            for _ in 1..hops {
                edges.push((prev, m));
                prev = m;
                m += 1;
            }
            edges.push((prev, j));
        }
        let base = if opts.value_instance_nodes {
            1.0
        } else {
            opts.epsilon
        };
        let mut weights = vec![opts.epsilon; m];
        weights[..self.nodes].fill(base);
        let env = EnvGraph::build(m, &edges, weights)?;
        Ok(env.with_meta(GraphMeta {
            generator: "orlib".into(),
            seed: None,
            params: json!({
                "instance_nodes": self.nodes,
                "instance_edges": self.edges.len(),
                "p": self.p,
                "cost_scale": opts.cost_scale,
            }),
        }))
    }
}

pub fn load_orlib(path: impl AsRef<Path>, opts: OrlibOptions) -> Result<(OrlibInstance, EnvGraph)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let inst = parse_orlib(&text)?;
    let env = inst.to_graph(opts)?;
    Ok((inst, env))
}
