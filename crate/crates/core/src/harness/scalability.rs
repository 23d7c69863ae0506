use serde::{Deserialize, Serialize};

use crate::coverage::Instance;
use crate::env_graph::generators::gen_grid;
use crate::nbo::{run_nbo, NboConfig};
use crate::{Error, Result};

use super::config::{trial_seed, TrialConfig};
use super::stats::Stats;

/// Grid sweep: `sizes` at `fixed_agents` and `agents` at `fixed_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalabilityConfig {
    pub sizes: Vec<usize>,
    pub fixed_agents: usize,
    pub agents: Vec<usize>,
    pub fixed_size: usize,
    /// Grid height; width is `size / height`.
    pub height: usize,
    /// Share of valued nodes.
    pub valued_fraction: f64,
    pub seeds: u64,
    pub master_seed: u64,
    pub epsilon: f64,
}

impl Default for ScalabilityConfig {
    fn default() -> Self {
        ScalabilityConfig {
            sizes: vec![48, 96, 192],
            fixed_agents: 20,
            agents: vec![10, 20, 40],
            fixed_size: 192,
            height: 4,
            valued_fraction: 0.5,
            seeds: 5,
            master_seed: 0,
            epsilon: crate::env_graph::DEFAULT_EPSILON,
        }
    }
}

impl ScalabilityConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 || self.height == 0 {
            return Err(Error::Config("seeds and height must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.valued_fraction) {
            return Err(Error::Config("valued_fraction must lie in [0, 1]".into()));
        }
        for (&size, n) in self
            .sizes
            .iter()
            .map(|s| (s, self.fixed_agents))
            .chain(self.agents.iter().map(|&n| (&self.fixed_size, n)))
        {
            if size % self.height != 0 || n == 0 || n > size {
                return Err(Error::Config(format!(
                    "cell |C|={size}, n={n} is invalid for height {}",
                    self.height
                )));
            }
        }
        Ok(())
    }
}

/// Median runtime of one `(|C|, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityCell {
    pub nodes: usize,
    pub agents: usize,
    pub median_secs: f64,
    pub median_iterations: f64,
    pub iterations: Vec<u64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityTable {
    /// Cells over `sizes` at the fixed team size.
    pub by_size: Vec<ScalabilityCell>,
    /// Cells over `agents` at the fixed size.
    pub by_agents: Vec<ScalabilityCell>,
    /// Median runtime non-decreasing in `|C|`.
    pub size_trend_ok: bool,
    /// Median runtime non-increasing in `n`.
    pub agent_trend_ok: bool,
}

/// Runs NBO `seeds` times on one grid cell. Runs are sequential so timings do
/// not compete for cores.
pub fn run_cell(cfg: &ScalabilityConfig, nodes: usize, agents: usize) -> Result<ScalabilityCell> {
    let width = nodes / cfg.height;
    let valued = (nodes as f64 * cfg.valued_fraction).round() as usize;
    let mut secs = Vec::new();
    let mut iterations = Vec::new();
    for s in 0..cfg.seeds {
        let seed = trial_seed(cfg.master_seed, &format!("grid{nodes}n{agents}"), s);
        let env = gen_grid(width, cfg.height, valued, seed)?.with_epsilon(cfg.epsilon)?;
        let inst = Instance::with_defaults(env);
        let trial = TrialConfig {
            agents,
            seed,
            ..TrialConfig::default()
        };
        let initial = trial.initial(nodes)?;
        let nbo = NboConfig {
            record_trace: false,
            ..NboConfig::default()
        };
        let start = std::time::Instant::now();
        let out = run_nbo(&inst, &nbo, initial)?;
        secs.push(start.elapsed().as_secs_f64());
        iterations.push(out.iterations);
    }
    let its: Vec<f64> = iterations.iter().map(|&i| i as f64).collect();
    Ok(ScalabilityCell {
        nodes,
        agents,
        median_secs: Stats::median(&secs).expect("seeds > 0"),
        median_iterations: Stats::median(&its).expect("seeds > 0"),
        iterations,
        runs: secs.len(),
    })
}

pub fn scalability_sweep(cfg: &ScalabilityConfig) -> Result<ScalabilityTable> {
    cfg.validate()?;
    let by_size = cfg
        .sizes
        .iter()
        .map(|&s| run_cell(cfg, s, cfg.fixed_agents))
        .collect::<Result<Vec<_>>>()?;
    let by_agents = cfg
        .agents
        .iter()
        .map(|&n| run_cell(cfg, cfg.fixed_size, n))
        .collect::<Result<Vec<_>>>()?;
    let size_trend_ok = by_size
        .windows(2)
        .all(|w| w[1].median_secs >= w[0].median_secs);
    let agent_trend_ok = by_agents
        .windows(2)
        .all(|w| w[1].median_secs <= w[0].median_secs);
    Ok(ScalabilityTable {
        by_size,
        by_agents,
        size_trend_ok,
        agent_trend_ok,
    })
}

impl ScalabilityTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,nodes,agents,median_secs,median_iterations,runs\n");
        for (label, cells) in [("size", &self.by_size), ("agents", &self.by_agents)] {
            for c in cells {
                out.push_str(&format!(
                    "{label},{},{},{:.6},{},{}\n",
                    c.nodes, c.agents, c.median_secs, c.median_iterations, c.runs
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScalabilityConfig {
        ScalabilityConfig {
            sizes: vec![16, 24],
            fixed_agents: 3,
            agents: vec![2, 4],
            fixed_size: 24,
            height: 4,
            seeds: 2,
            ..ScalabilityConfig::default()
        }
    }

    #[test]
    fn same_seed_same_iterations() {
        let cfg = small();
        let a = run_cell(&cfg, 24, 3).unwrap();
        let b = run_cell(&cfg, 24, 3).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.runs, 2);
    }

    #[test]
    fn sweep_shape() {
        let t = scalability_sweep(&small()).unwrap();
        assert_eq!(t.by_size.len(), 2);
        assert_eq!(t.by_agents.len(), 2);
        assert_eq!(t.to_csv().lines().count(), 5);
    }

    #[test]
    fn bad_cells_are_rejected() {
        let cfg = ScalabilityConfig {
            sizes: vec![30],
            ..small()
        };
        assert!(matches!(scalability_sweep(&cfg), Err(Error::Config(_))));
    }
}
