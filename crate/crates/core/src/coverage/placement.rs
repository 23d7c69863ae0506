use crate::env_graph::{Decay, EnvGraph};
use crate::{Error, NodeId, Result};

use super::region::RegionView;

/// Improvements smaller than this do not displace an earlier (lexicographically
/// smaller) maximizer.
const TIE_EPS: f64 = 1e-10;

/// Result of an exhaustive k-agent placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Increase of the region objective over the fixed agents alone.
    pub gain: f64,
    /// Chosen nodes, ascending.
    pub nodes: Vec<NodeId>,
}

/// Exhaustive search over every k-subset of free region nodes for the one
/// that maximizes the region objective together with `fixed`. Returns the
/// lexicographically least maximizer.
pub fn best_placement(
    env: &EnvGraph,
    g: &Decay,
    view: &RegionView,
    fixed: &[NodeId],
    k: usize,
) -> Result<Placement> {
    let r = view.len();
    let mut occupied = vec![false; r];
    for (agent, &node) in fixed.iter().enumerate() {
        let local = view
            .local(node)
            .ok_or(Error::AgentOutsideRegion { agent, node })?;
        occupied[local] = true;
    }
    let free: Vec<usize> = (0..r).filter(|&a| !occupied[a]).collect();
    if free.len() < k {
        return Err(Error::RegionTooSmall {
            region: r,
            needed: k + fixed.len(),
        });
    }
    // Only positively weighted nodes contribute.
    let cols: Vec<usize> = (0..r)
        .filter(|&c| env.weight(view.nodes()[c]) > 0.0)
        .collect();
    let w = cols.len();
    let mut base = vec![0.0f64; w];
    for &node in fixed {
        let a = view.local(node).expect("checked above");
        for (slot, &c) in base.iter_mut().zip(&cols) {
            *slot = f64::max(*slot, view.gain(env, g, a, c));
        }
    }
    let base_sum: f64 = base.iter().sum();
    if k == 0 {
        return Ok(Placement {
            gain: 0.0,
            nodes: Vec::new(),
        });
    }
    let table: Vec<f64> = free
        .iter()
        .flat_map(|&a| cols.iter().map(move |&c| (a, c)))
        .map(|(a, c)| view.gain(env, g, a, c))
        .collect();

    let mut search = Search {
        table: &table,
        w,
        n_free: free.len(),
        k,
        layers: vec![base; k],
        chosen: vec![0; k],
        best: f64::NEG_INFINITY,
        best_set: Vec::new(),
    };
    search.descend(0, 0);
    let nodes = search
        .best_set
        .iter()
        .map(|&f| view.nodes()[free[f]])
        .collect();
    Ok(Placement {
        gain: search.best - base_sum,
        nodes,
    })
}

/// `M_k`: the gain of [`best_placement`].
pub fn marginal_gain(
    env: &EnvGraph,
    g: &Decay,
    view: &RegionView,
    fixed: &[NodeId],
    k: usize,
) -> Result<f64> {
    best_placement(env, g, view, fixed, k).map(|p| p.gain)
}

struct Search<'a> {
    table: &'a [f64],
    w: usize,
    n_free: usize,
    k: usize,
    /// `layers[d]` is the per-column coverage before choosing the d-th node.
    layers: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    best: f64,
    best_set: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, start: usize) {
        let remaining = self.k - depth;
        for f in start..=self.n_free - remaining {
            let row = &self.table[f * self.w..(f + 1) * self.w];
            self.chosen[depth] = f;
            if remaining == 1 {
                let total: f64 = self.layers[depth]
                    .iter()
                    .zip(row)
                    .map(|(&a, &b)| a.max(b))
                    .sum();
                if total > self.best + TIE_EPS {
                    self.best = total;
                    self.best_set.clone_from(&self.chosen);
                }
            } else {
                let (lo, hi) = self.layers.split_at_mut(depth + 1);
                for ((dst, &a), &b) in hi[0].iter_mut().zip(&lo[depth]).zip(row) {
                    *dst = a.max(b);
                }
                self.descend(depth + 1, f + 1);
            }
        }
    }
}
