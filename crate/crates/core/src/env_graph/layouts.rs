//! Hand-authored environment layouts stored as versioned ASCII maps.
//!
//! Map syntax: lines starting with `;` are comments, `.` is a node and any
//! other character is a wall. Nodes are numbered row-major and connected to
//! their 4-neighbors.

use serde_json::json;

use super::{EnvGraph, GraphMeta, DEFAULT_EPSILON};
use crate::{Error, Result};

pub struct Layout {
    pub name: &'static str,
    pub text: &'static str,
}

pub const BRIDGE: Layout = Layout {
    name: "bridge",
    text: include_str!("../../data/bridge.txt"),
};

pub const INDOOR: Layout = Layout {
    name: "indoor",
    text: include_str!("../../data/indoor.txt"),
};

impl Layout {
    pub fn graph(&self) -> Result<EnvGraph> {
        let env = parse_ascii(self.text)?;
        Ok(env.with_meta(GraphMeta {
            generator: self.name.into(),
            seed: None,
            params: json!({"version": version(self.text)}),
        }))
    }
}

fn version(text: &str) -> Option<u32> {
    let header = text.lines().next()?;
    header.rsplit("version").next()?.trim().parse().ok()
}

/// Builds a graph from an ASCII map. All nodes get [`DEFAULT_EPSILON`].
pub fn parse_ascii(text: &str) -> Result<EnvGraph> {
    let mut index = std::collections::HashMap::new();
    let mut coords = Vec::new();
    let mut row = 0i32;
    for line in text.lines() {
        if line.starts_with(';') {
            continue;
        }
        for (col, ch) in line.chars().enumerate() {
            if ch == '.' {
                index.insert((row, col as i32), coords.len());
                coords.push(vec![col as i32, row]);
            }
        }
        row += 1;
    }
    if coords.is_empty() {
        return Err(Error::InvalidParams("layout has no nodes".into()));
    }
    let mut edges = Vec::new();
    for (id, c) in coords.iter().enumerate() {
        let (x, y) = (c[0], c[1]);
        for p in [(y, x + 1), (y + 1, x)] {
            if let Some(&nb) = index.get(&p) {
                edges.push((id, nb));
            }
        }
    }
    let m = coords.len();
    EnvGraph::build(m, &edges, vec![DEFAULT_EPSILON; m])?.with_coords(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_has_one_cut_path_between_wide_blocks() {
        let g = BRIDGE.graph().unwrap();
        assert_eq!(g.node_count(), 38);
        assert_eq!(g.meta().params["version"], 1);
        let cuts = g.articulation_points();
        // The cut vertices form a single induced path.
        assert!(g.induces_connected(&cuts));
        let degrees: Vec<usize> = cuts
            .iter()
            .map(|&c| g.neighbors(c).iter().filter(|n| cuts.contains(n)).count())
            .collect();
        assert_eq!(degrees.iter().filter(|&&d| d == 1).count(), 2);
        assert!(degrees.iter().all(|&d| d <= 2));
        // Removing the path leaves two components, each containing a 2x2 square.
        let rest: Vec<usize> = (0..g.node_count()).filter(|n| !cuts.contains(n)).collect();
        assert!(!g.induces_connected(&rest));
        let coords = g.coords().unwrap();
        let has_square = |side: std::ops::Range<i32>| {
            rest.iter().any(|&n| {
                let (x, y) = (coords[n][0], coords[n][1]);
                side.contains(&x)
                    && [(x + 1, y), (x, y + 1), (x + 1, y + 1)]
                        .iter()
                        .all(|&(a, b)| coords.iter().any(|c| c[0] == a && c[1] == b))
            })
        };
        assert!(has_square(0..4));
        assert!(has_square(10..14));
    }

    #[test]
    fn indoor_rooms_hang_off_the_corridor() {
        let g = INDOOR.graph().unwrap();
        assert!(g.is_connected());
        assert_eq!(g.node_count(), 8 * 8 + 8 + 19);
        assert!(g.articulation_points().len() >= 2);
    }

    #[test]
    fn empty_map_is_rejected() {
        assert!(parse_ascii("; nothing\n####\n").is_err());
    }
}
