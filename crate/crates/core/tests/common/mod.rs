//! Fixtures and brute-force oracles shared by the integration tests. The
//! oracles use nothing from the crate except graph accessors.
#![allow(dead_code)]

use std::collections::VecDeque;

use covctl::coverage::Instance;
use covctl::env_graph::EnvGraph;

pub const COLS: usize = 9;
pub const ROWS: usize = 6;

pub fn cell(col: usize, row: usize) -> usize {
    row * COLS + col
}

/// Agents a..f of the 9x6 grid example, indexed by `(col, row)` on a
/// half-unit lattice.
pub const EXAMPLE_AGENTS: [(usize, usize); 6] = [(0, 0), (1, 0), (4, 0), (4, 3), (7, 2), (8, 1)];

const EXAMPLE_CIRCLED: [(usize, &[usize]); 6] = [
    (0, &[2, 3, 5, 6, 7, 8]),
    (1, &[4, 5, 6, 7]),
    (2, &[4, 5, 6, 8]),
    (3, &[5, 7, 8]),
    (4, &[4, 5, 6, 7, 8]),
    (5, &[4, 5, 6, 7, 8]),
];

/// 9x6 grid, weight 1 on the circled junctions and the agent cells, 0
/// elsewhere.
pub fn example_grid() -> EnvGraph {
    let mut edges = Vec::new();
    for r in 0..ROWS {
        for c in 0..COLS {
            if c + 1 < COLS {
                edges.push((cell(c, r), cell(c + 1, r)));
            }
            if r + 1 < ROWS {
                edges.push((cell(c, r), cell(c, r + 1)));
            }
        }
    }
    let mut w = vec![0.0; COLS * ROWS];
    for (row, cols) in EXAMPLE_CIRCLED {
        for &c in cols {
            w[cell(c, row)] = 1.0;
        }
    }
    for (c, r) in EXAMPLE_AGENTS {
        w[cell(c, r)] = 1.0;
    }
    EnvGraph::build(COLS * ROWS, &edges, w).unwrap()
}

pub fn example_positions() -> Vec<usize> {
    EXAMPLE_AGENTS.iter().map(|&(c, r)| cell(c, r)).collect()
}

/// Path of `m` unit-weight nodes.
pub fn unit_path(m: usize) -> EnvGraph {
    let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
    EnvGraph::build(m, &edges, vec![1.0; m]).unwrap()
}

/// BFS hop distances from `src`, optionally restricted to `allowed` nodes.
pub fn bfs(env: &EnvGraph, src: usize, allowed: Option<&[usize]>) -> Vec<Option<u32>> {
    let m = env.node_count();
    let mut ok = vec![allowed.is_none(); m];
    if let Some(a) = allowed {
        for &v in a {
            ok[v] = true;
        }
    }
    let mut dist = vec![None; m];
    if !ok[src] {
        return dist;
    }
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        let du = dist[u].unwrap();
        for &v in env.neighbors(u) {
            if ok[v] && dist[v].is_none() {
                dist[v] = Some(du + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// `sum v_c / (1 + d(c))` over `region`, distances inside the region.
pub fn oracle_objective(env: &EnvGraph, positions: &[usize], region: Option<&[usize]>) -> f64 {
    let rows: Vec<_> = positions.iter().map(|&p| bfs(env, p, region)).collect();
    let nodes: Vec<usize> = match region {
        Some(r) => r.to_vec(),
        None => (0..env.node_count()).collect(),
    };
    nodes
        .iter()
        .map(|&c| {
            let best = rows.iter().filter_map(|r| r[c]).min();
            best.map_or(0.0, |d| env.weight(c) / (1.0 + d as f64))
        })
        .sum()
}

/// Lexicographic k-subsets of `0..m`.
pub fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(p) = (0..k).rev().find(|&p| idx[p] < m - k + p) else {
            return;
        };
        idx[p] += 1;
        for q in p + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Best objective over all `n`-subsets.
pub fn oracle_opt(env: &EnvGraph, n: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_subset(env.node_count(), n, |s| {
        best = best.max(oracle_objective(env, s, None));
    });
    best
}

/// Geodesic Voronoi owner of every node, ties to the lower agent index.
pub fn oracle_voronoi(env: &EnvGraph, positions: &[usize]) -> Vec<usize> {
    let rows: Vec<_> = positions.iter().map(|&p| bfs(env, p, None)).collect();
    (0..env.node_count())
        .map(|c| {
            (0..positions.len())
                .min_by_key(|&i| (rows[i][c].unwrap(), i))
                .unwrap()
        })
        .collect()
}

pub fn instance(env: EnvGraph) -> Instance {
    Instance::with_defaults(env)
}
