use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coverage::{Allocation, Instance, RegionMetric};
use crate::env_graph::generators::{self, rng_for, MazeParams};
use crate::env_graph::orlib::{load_orlib, OrlibOptions};
use crate::env_graph::{Decay, EnvGraph, DEFAULT_EPSILON};
use crate::nbo::NboConfig;
use crate::{Error, Result};

/// Environment generator and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Chain {
        m: usize,
        valued: usize,
    },
    Star {
        branches: usize,
        branch_len: usize,
        valued: usize,
    },
    Tree {
        m: usize,
        valued: usize,
    },
    Maze {
        w: usize,
        /// Template nodes to remove; defaults to a fifth of the template.
        #[serde(default)]
        removed: Option<usize>,
        /// Defaults to a third of the remaining nodes.
        #[serde(default)]
        valued: Option<usize>,
    },
    Bridge {
        valued: usize,
    },
    Indoor {
        valued: usize,
    },
    Lattice3d {
        dims: [usize; 3],
        valued: usize,
    },
    Grid {
        width: usize,
        height: usize,
        valued: usize,
    },
    Orlib {
        path: PathBuf,
        #[serde(default = "one")]
        cost_scale: f64,
    },
    /// Graph JSON document; weights are taken as stored.
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

impl ShapeSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ShapeSpec::Chain { .. } => "chain",
            ShapeSpec::Star { .. } => "star",
            ShapeSpec::Tree { .. } => "tree",
            ShapeSpec::Maze { .. } => "maze",
            ShapeSpec::Bridge { .. } => "bridge",
            ShapeSpec::Indoor { .. } => "indoor",
            ShapeSpec::Lattice3d { .. } => "lattice3d",
            ShapeSpec::Grid { .. } => "grid",
            ShapeSpec::Orlib { .. } => "orlib",
            ShapeSpec::File { .. } => "file",
        }
    }

    /// Builds the environment for `seed` with non-valued weight `epsilon`.
    /// Relative paths are resolved against `base`.
    pub fn build(&self, seed: u64, epsilon: f64, base: Option<&Path>) -> Result<EnvGraph> {
        let resolve = |p: &Path| match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };
        let with_valued = |env: EnvGraph, k: usize| -> Result<EnvGraph> {
            generators::assign_random_valued(env, k, &mut rng_for(seed))
        };
        let env = match *self {
            ShapeSpec::Chain { m, valued } => generators::gen_chain(m, valued, seed)?,
            ShapeSpec::Star {
                branches,
                branch_len,
                valued,
            } => generators::gen_star(branches, branch_len, valued, seed)?,
            ShapeSpec::Tree { m, valued } => generators::gen_tree(m, valued, seed)?,
            ShapeSpec::Maze { w, removed, valued } => {
                if !(1..=2).contains(&w) {
                    return Err(Error::InvalidParams(format!(
                        "maze width w must be 1 or 2, got {w}"
                    )));
                }
                let defaults = MazeParams::defaults(w);
                let removed = removed.unwrap_or(defaults.removed);
                let remaining = MazeParams::template_nodes(w).saturating_sub(removed);
                let params = MazeParams {
                    w,
                    removed,
                    valued: valued.unwrap_or(remaining / 3),
                };
                generators::gen_random_maze_with(params, seed)?
            }
            ShapeSpec::Bridge { valued } => with_valued(generators::gen_bridge(), valued)?,
            ShapeSpec::Indoor { valued } => with_valued(generators::gen_indoor(), valued)?,
            ShapeSpec::Lattice3d { dims, valued } => {
                generators::gen_lattice3d((dims[0], dims[1], dims[2]), valued, seed)?
            }
            ShapeSpec::Grid {
                width,
                height,
                valued,
            } => generators::gen_grid(width, height, valued, seed)?,
            ShapeSpec::Orlib {
                ref path,
                cost_scale,
            } => {
                let opts = OrlibOptions {
                    cost_scale,
                    epsilon,
                    ..OrlibOptions::default()
                };
                return Ok(load_orlib(resolve(path), opts)?.1);
            }
            ShapeSpec::File { ref path } => {
                let path = resolve(path);
                let text =
                    std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?;
                return EnvGraph::from_json(&text);
            }
        };
        env.with_epsilon(epsilon)
    }
}

/// Algorithms a trial can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgId {
    Nbo,
    Vvp,
    Sota,
    Cgr,
    Opt,
}

impl AlgId {
    pub const ALL: [AlgId; 5] = [AlgId::Nbo, AlgId::Vvp, AlgId::Sota, AlgId::Cgr, AlgId::Opt];

    pub fn name(self) -> &'static str {
        match self {
            AlgId::Nbo => "nbo",
            AlgId::Vvp => "vvp",
            AlgId::Sota => "sota",
            AlgId::Cgr => "cgr",
            AlgId::Opt => "opt",
        }
    }
}

impl fmt::Display for AlgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown algorithm {s:?}")))
    }
}

/// How initial positions are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Distinct nodes sampled uniformly.
    #[default]
    Uniform,
    /// Agent `i` starts on node `i`.
    Packed,
}

/// One trial: an environment, a team size and the algorithms to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    /// Label used in summaries; defaults to the shape kind.
    pub name: String,
    pub shape: ShapeSpec,
    pub agents: usize,
    /// Seed of this trial. In sweeps it is derived from the master seed.
    pub seed: u64,
    pub trial: u64,
    pub epsilon: f64,
    pub decay: Decay,
    pub metric: RegionMetric,
    pub init: InitMode,
    pub algorithms: Vec<AlgId>,
    pub nbo: NboConfig,
    pub vvp_max_passes: u64,
    pub brute_force_budget: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            name: String::new(),
            shape: ShapeSpec::Chain { m: 20, valued: 10 },
            agents: 5,
            seed: 0,
            trial: 0,
            epsilon: DEFAULT_EPSILON,
            decay: Decay::InverseLinear,
            metric: RegionMetric::Induced,
            init: InitMode::Uniform,
            algorithms: AlgId::ALL.to_vec(),
            nbo: NboConfig::default(),
            vvp_max_passes: 500,
            brute_force_budget: crate::baselines::DEFAULT_BRUTE_FORCE_BUDGET as u64,
        }
    }
}

impl TrialConfig {
    pub fn label(&self) -> &str {
        if self.name.is_empty() {
            self.shape.kind()
        } else {
            &self.name
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::Config("agents must be positive".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.vvp_max_passes == 0 {
            return Err(Error::Config("vvp_max_passes must be positive".into()));
        }
        Ok(())
    }

    /// Environment and solver instance for this trial.
    pub fn instance(&self, base: Option<&Path>) -> Result<Instance> {
        let env = self.shape.build(self.seed, self.epsilon, base)?;
        Ok(Instance::new(env, self.decay, self.metric))
    }

    /// Initial allocation, drawn from a stream independent of the graph's.
    pub fn initial(&self, node_count: usize) -> Result<Allocation> {
        match self.init {
            InitMode::Uniform => {
                let mut rng = rng_for(splitmix64(self.seed ^ 0x696e_6974));
                Allocation::random(node_count, self.agents, &mut rng)
            }
            InitMode::Packed => Allocation::new((0..self.agents).collect(), node_count),
        }
    }
}

/// A set of experiments, each repeated `trials` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(rename = "experiment")]
    pub experiments: Vec<TrialConfig>,
}

fn default_trials() -> u64 {
    32
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.experiments.is_empty() {
            return Err(Error::Config("no [[experiment]] tables".into()));
        }
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        for e in &cfg.experiments {
            e.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every trial of every experiment with its derived seed.
    pub fn trial_configs(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for e in &self.experiments {
            for t in 0..self.trials {
                let mut cfg = e.clone();
                cfg.trial = t;
                cfg.seed = trial_seed(self.master_seed, e.label(), t);
                out.push(cfg);
            }
        }
        out
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `hash(master_seed, shape, trial)`: FNV-1a over the label, mixed with
/// splitmix64.
pub fn trial_seed(master: u64, shape: &str, trial: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in shape.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(master ^ h).wrapping_add(trial))
}

/// The eight benchmark shape families at desk scale.
pub fn benchmark_experiments() -> Vec<TrialConfig> {
    let base = |name: &str, shape: ShapeSpec, agents: usize| TrialConfig {
        name: name.into(),
        shape,
        agents,
        algorithms: vec![AlgId::Nbo, AlgId::Vvp, AlgId::Sota, AlgId::Cgr],
        ..TrialConfig::default()
    };
    vec![
        base("chains", ShapeSpec::Chain { m: 20, valued: 10 }, 5),
        base(
            "stars",
            ShapeSpec::Star {
                branches: 4,
                branch_len: 6,
                valued: 8,
            },
            5,
        ),
        base("trees", ShapeSpec::Tree { m: 30, valued: 10 }, 5),
        base("indoor", ShapeSpec::Indoor { valued: 30 }, 21),
        base(
            "maze_w1",
            ShapeSpec::Maze {
                w: 1,
                removed: None,
                valued: None,
            },
            5,
        ),
        base(
            "maze_w2",
            ShapeSpec::Maze {
                w: 2,
                removed: None,
                valued: None,
            },
            5,
        ),
        base("bridge", ShapeSpec::Bridge { valued: 12 }, 5),
        base(
            "lattice3d",
            ShapeSpec::Lattice3d {
                dims: [5, 5, 3],
                valued: 25,
            },
            18,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_are_stable_and_distinct() {
        let a = trial_seed(1, "chains", 0);
        assert_eq!(a, trial_seed(1, "chains", 0));
        assert_ne!(a, trial_seed(1, "chains", 1));
        assert_ne!(a, trial_seed(1, "stars", 0));
        assert_ne!(a, trial_seed(2, "chains", 0));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SweepConfig {
            master_seed: 3,
            trials: 4,
            parallelism: Some(2),
            experiments: benchmark_experiments(),
        };
        let text = cfg.to_toml();
        assert_eq!(SweepConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg = SweepConfig::from_toml(
            r#"
            [[experiment]]
            shape = { kind = "chain", m = 12, valued = 6 }
            agents = 2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 32);
        let e = &cfg.experiments[0];
        assert_eq!(e.label(), "chain");
        assert_eq!(e.algorithms, AlgId::ALL.to_vec());
        assert_eq!(cfg.trial_configs().len(), 32);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SweepConfig::from_toml(
            r#"
            [[experiment]]
            shape = { kind = "chain", m = 12, valued = 6 }
            agnets = 2
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn maze_width_is_checked() {
        let spec = ShapeSpec::Maze {
            w: 3,
            removed: None,
            valued: None,
        };
        assert!(matches!(
            spec.build(0, 1e-3, None),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn every_benchmark_shape_builds() {
        for e in benchmark_experiments() {
            let inst = e.instance(None).unwrap();
            assert!(inst.node_count() > e.agents, "{}", e.label());
            assert!(inst.env().is_connected());
            let init = e.initial(inst.node_count()).unwrap();
            assert_eq!(init.len(), e.agents);
        }
    }
}
