//! Seeded generators for every experimental environment shape.
//!
//! All generators are pure functions of their parameters and seed. Valued
//! nodes (weight 1) are sampled uniformly without replacement; every other
//! node gets [`DEFAULT_EPSILON`] (rescale with [`EnvGraph::with_epsilon`]).

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{layouts, EnvGraph, GraphMeta, DEFAULT_EPSILON};
use crate::{Error, NodeId, Result};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Marks `k` uniformly chosen nodes as valued.
pub fn assign_random_valued(env: EnvGraph, k: usize, rng: &mut impl Rng) -> Result<EnvGraph> {
    let m = env.node_count();
    if k > m {
        return Err(Error::InvalidParams(format!(
            "{k} valued nodes requested on {m} nodes"
        )));
    }
    let mut chosen: Vec<NodeId> = sample(rng, m, k).into_vec();
    chosen.sort_unstable();
    env.with_valued_nodes(&chosen, DEFAULT_EPSILON)
}

fn finish(
    env: EnvGraph,
    k: usize,
    seed: u64,
    generator: &str,
    params: serde_json::Value,
) -> Result<EnvGraph> {
    let mut rng = rng_for(seed);
    let env = assign_random_valued(env, k, &mut rng)?;
    Ok(env.with_meta(GraphMeta {
        generator: generator.into(),
        seed: Some(seed),
        params,
    }))
}

/// Path of `m` nodes with `k` valued nodes.
pub fn gen_chain(m: usize, k: usize, seed: u64) -> Result<EnvGraph> {
    if m == 0 || k > m {
        return Err(Error::InvalidParams(format!(
            "chain needs 0 < m and k <= m (m={m}, k={k})"
        )));
    }
    let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
    let env = EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?
        .with_coords((0..m as i32).map(|i| vec![i]).collect())?;
    finish(env, k, seed, "chain", json!({"m": m, "valued": k}))
}

/// Star: a center node with `branches` paths of `branch_len` nodes each.
pub fn gen_star(branches: usize, branch_len: usize, k: usize, seed: u64) -> Result<EnvGraph> {
    if branches == 0 || branch_len == 0 {
        return Err(Error::InvalidParams(
            "star needs positive branches and length".into(),
        ));
    }
    let m = 1 + branches * branch_len;
    if k > m {
        return Err(Error::InvalidParams(format!(
            "{k} valued nodes on {m}-node star"
        )));
    }
    let mut edges = Vec::with_capacity(m - 1);
    let mut coords = vec![vec![0, 0]];
    for b in 0..branches {
        let (dx, dy) = match b % 4 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        let ring = (b / 4) as i32;
        for step in 0..branch_len {
            let id = 1 + b * branch_len + step;
            let prev = if step == 0 { 0 } else { id - 1 };
            edges.push((prev, id));
            let r = (step + 1) as i32;
            coords.push(vec![dx * r + dy * ring, dy * r + dx * ring]);
        }
    }
    let env = EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?.with_coords(coords)?;
    finish(
        env,
        k,
        seed,
        "star",
        json!({"branches": branches, "branch_len": branch_len, "valued": k}),
    )
}

/// Uniformly random labeled tree on `m` nodes (Prüfer decoding).
pub fn gen_tree(m: usize, k: usize, seed: u64) -> Result<EnvGraph> {
    if m == 0 || k > m {
        return Err(Error::InvalidParams(format!(
            "tree needs 0 < m and k <= m (m={m}, k={k})"
        )));
    }
    // The tree topology and the valued set use independent streams.
    let mut rng = rng_for(seed ^ 0x7472_6565);
    let edges = random_tree_edges(m, &mut rng);
    let env = EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?;
    finish(env, k, seed, "tree", json!({"m": m, "valued": k}))
}

fn random_tree_edges(m: usize, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    match m {
        1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let prufer: Vec<NodeId> = (0..m - 2).map(|_| rng.gen_range(0..m)).collect();
    let mut degree = vec![1usize; m];
    for &p in &prufer {
        degree[p] += 1;
    }
    let mut leaves: std::collections::BTreeSet<NodeId> =
        (0..m).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(m - 1);
    for &p in &prufer {
        let leaf = *leaves.iter().next().expect("a leaf always exists");
        leaves.remove(&leaf);
        edges.push((leaf, p));
        degree[p] -= 1;
        if degree[p] == 1 {
            leaves.insert(p);
        }
    }
    let rest: Vec<NodeId> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// `width x height` 4-connected grid.
pub fn gen_grid(width: usize, height: usize, k: usize, seed: u64) -> Result<EnvGraph> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParams(
            "grid needs positive width and height".into(),
        ));
    }
    let m = width * height;
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::new();
    let mut coords = Vec::with_capacity(m);
    for y in 0..height {
        for x in 0..width {
            coords.push(vec![x as i32, y as i32]);
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let env = EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?.with_coords(coords)?;
    finish(
        env,
        k,
        seed,
        "grid",
        json!({"width": width, "height": height, "valued": k}),
    )
}

/// Full 3D lattice with 6-neighborhood.
pub fn gen_lattice3d(dims: (usize, usize, usize), k: usize, seed: u64) -> Result<EnvGraph> {
    let (nx, ny, nz) = dims;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidParams("lattice needs positive dims".into()));
    }
    let m = nx * ny * nz;
    let id = |x: usize, y: usize, z: usize| (z * ny + y) * nx + x;
    let mut edges = Vec::new();
    let mut coords = Vec::with_capacity(m);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                coords.push(vec![x as i32, y as i32, z as i32]);
                if x + 1 < nx {
                    edges.push((id(x, y, z), id(x + 1, y, z)));
                }
                if y + 1 < ny {
                    edges.push((id(x, y, z), id(x, y + 1, z)));
                }
                if z + 1 < nz {
                    edges.push((id(x, y, z), id(x, y, z + 1)));
                }
            }
        }
    }
    let env = EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?.with_coords(coords)?;
    finish(
        env,
        k,
        seed,
        "lattice3d",
        json!({"dims": [nx, ny, nz], "valued": k}),
    )
}

/// Parameters of the randomized maze generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeParams {
    /// Corridor width, 1 or 2.
    pub w: usize,
    /// Nodes removed from the template.
    pub removed: usize,
    /// Valued nodes placed on the result.
    pub valued: usize,
}

impl MazeParams {
    /// Side of the square template, `3(w+1) - 1`.
    pub fn side(w: usize) -> usize {
        3 * (w + 1) - 1
    }

    /// Tail length, `2w + 4`.
    pub fn tail(w: usize) -> usize {
        2 * w + 4
    }

    pub fn template_nodes(w: usize) -> usize {
        let side = Self::side(w);
        side * side - 4 + Self::tail(w) * w
    }

    /// Removes a fifth of the template and values a third of what remains.
    pub fn defaults(w: usize) -> Self {
        let template = Self::template_nodes(w);
        let removed = template / 5;
        MazeParams {
            w,
            removed,
            valued: (template - removed) / 3,
        }
    }
}

/// Randomized maze with the default removal and valued counts for `w`.
pub fn gen_random_maze(w: usize, seed: u64) -> Result<EnvGraph> {
    if !(1..=2).contains(&w) {
        return Err(Error::InvalidParams(format!(
            "maze width w must be 1 or 2, got {w}"
        )));
    }
    gen_random_maze_with(MazeParams::defaults(w), seed)
}

/// The template is a `side x side` square crossed by three horizontal and
/// three vertical corridors of width `w`, separated by unit walls, with a tail
/// of length `2w + 4` leaving the bottom-right corner. Nodes are then removed
/// uniformly at random, skipping any removal that would disconnect the graph.
pub fn gen_random_maze_with(params: MazeParams, seed: u64) -> Result<EnvGraph> {
    let MazeParams { w, removed, valued } = params;
    if !(1..=2).contains(&w) {
        return Err(Error::InvalidParams(format!(
            "maze width w must be 1 or 2, got {w}"
        )));
    }
    let side = MazeParams::side(w);
    let tail = MazeParams::tail(w);
    let is_wall = |i: usize| i == w || i == 2 * w + 1;
    let mut cells: Vec<(i32, i32)> = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if !(is_wall(r) && is_wall(c)) {
                cells.push((r as i32, c as i32));
            }
        }
    }
    for r in side - w..side {
        for c in side..side + tail {
            cells.push((r as i32, c as i32));
        }
    }
    let template = cells.len();
    if removed >= template || valued > template - removed {
        return Err(Error::InvalidParams(format!(
            "maze template has {template} nodes; cannot remove {removed} and value {valued}"
        )));
    }

    let mut rng = rng_for(seed);
    let mut alive = vec![true; template];
    let index: std::collections::HashMap<(i32, i32), usize> =
        cells.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let neighbors = |i: usize| {
        let (r, c) = cells[i];
        [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter_map(|p| index.get(&p).copied())
            .collect::<Vec<_>>()
    };
    let adjacency: Vec<Vec<usize>> = (0..template).map(neighbors).collect();
    let mut order: Vec<usize> = (0..template).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    // A node rejected early can become removable later, so sweep the shuffled
    // order until enough nodes are gone. A connected graph always has a
    // removable node, hence every sweep makes progress.
    let mut count = 0;
    while count < removed {
        for &cand in &order {
            if count == removed {
                break;
            }
            if !alive[cand] {
                continue;
            }
            alive[cand] = false;
            if alive_connected(&adjacency, &alive) {
                count += 1;
            } else {
                alive[cand] = true;
            }
        }
    }

    let kept: Vec<usize> = (0..template).filter(|&i| alive[i]).collect();
    let mut new_id = vec![usize::MAX; template];
    for (new, &old) in kept.iter().enumerate() {
        new_id[old] = new;
    }
    let mut edges = Vec::new();
    for &old in &kept {
        for &nb in &adjacency[old] {
            if alive[nb] && old < nb {
                edges.push((new_id[old], new_id[nb]));
            }
        }
    }
    let coords = kept.iter().map(|&i| vec![cells[i].1, cells[i].0]).collect();
    let env = EnvGraph::build(kept.len(), &edges, vec![DEFAULT_EPSILON; kept.len()])?
        .with_coords(coords)?;
    let mut env = assign_random_valued(env, valued, &mut rng)?;
    env = env.with_meta(GraphMeta {
        generator: "maze".into(),
        seed: Some(seed),
        params: json!({"w": w, "side": side, "tail": tail, "removed": removed, "valued": valued}),
    });
    Ok(env)
}

fn alive_connected(adjacency: &[Vec<usize>], alive: &[bool]) -> bool {
    let Some(start) = alive.iter().position(|&a| a) else {
        return false;
    };
    let total = alive.iter().filter(|&&a| a).count();
    let mut seen = vec![false; alive.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if alive[v] && !seen[v] {
                seen[v] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    reached == total
}

/// Two grid blocks joined by a single-width bridge. No valued nodes.
pub fn gen_bridge() -> EnvGraph {
    layouts::BRIDGE.graph().expect("bridge layout is valid")
}

/// Rooms off a central corridor. No valued nodes.
pub fn gen_indoor() -> EnvGraph {
    layouts::INDOOR.graph().expect("indoor layout is valid")
}
