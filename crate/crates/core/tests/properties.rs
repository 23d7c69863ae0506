mod common;

use common::*;
use covctl::coverage::Allocation;
use covctl::env_graph::EnvGraph;
use covctl::nbo::{run_nbo, NboConfig};
use proptest::prelude::*;

/// Connected graph: a random tree plus a few extra edges, weights in {0, 0.5, 1}.
fn graph(max_nodes: usize) -> impl Strategy<Value = EnvGraph> {
    (3..=max_nodes)
        .prop_flat_map(|m| {
            (
                Just(m),
                proptest::collection::vec(any::<prop::sample::Index>(), m - 1),
                proptest::collection::vec((0..m, 0..m), 0..m),
                proptest::collection::vec(prop_oneof![Just(0.0), Just(0.5), Just(1.0)], m),
            )
        })
        .prop_map(|(m, parents, extra, weights)| {
            let mut edges: Vec<(usize, usize)> =
                (1..m).map(|v| (parents[v - 1].index(v), v)).collect();
            for (a, b) in extra {
                let e = (a.min(b), a.max(b));
                if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
                    edges.push(e);
                }
            }
            EnvGraph::build(m, &edges, weights).unwrap()
        })
}

/// Graph plus up to `max_agents` distinct positions in random order.
fn placed(max_nodes: usize, max_agents: usize) -> impl Strategy<Value = (EnvGraph, Vec<usize>)> {
    graph(max_nodes).prop_flat_map(move |env| {
        let m = env.node_count();
        let pos = proptest::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=max_agents.min(m))
            .prop_shuffle();
        (Just(env), pos)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn distances_match_bfs(env in graph(14)) {
        let inst = instance(env.clone());
        for s in 0..env.node_count() {
            let row = bfs(&env, s, None);
            for (t, d) in row.iter().enumerate() {
                prop_assert_eq!(inst.oracle().get(s, t), d.unwrap());
            }
        }
    }

    #[test]
    fn objective_matches_oracle((env, pos) in placed(14, 4)) {
        let inst = instance(env.clone());
        let g = inst.objective(&pos).unwrap();
        prop_assert!((g - oracle_objective(&env, &pos, None)).abs() < 1e-12);
    }

    #[test]
    fn voronoi_matches_oracle_and_utilities_sum_to_objective((env, pos) in placed(14, 4)) {
        let inst = instance(env.clone());
        let alloc = Allocation::new(pos.clone(), env.node_count()).unwrap();
        let part = inst.voronoi(&alloc).unwrap();
        part.validate(&env, &alloc).unwrap();
        let owners = oracle_voronoi(&env, &pos);
        for (c, &o) in owners.iter().enumerate() {
            prop_assert_eq!(part.owner(c), Some(o));
        }
        for (i, block) in part.blocks().iter().enumerate() {
            prop_assert!(env.induces_connected(block));
            prop_assert!(block.contains(&pos[i]));
        }
        let u = inst.utilities(&alloc, &part).unwrap();
        prop_assert!((u.iter().sum::<f64>() - inst.objective(&pos).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn adjacency_is_block_contact((env, pos) in placed(14, 4)) {
        let inst = instance(env.clone());
        let alloc = Allocation::new(pos.clone(), env.node_count()).unwrap();
        let part = inst.voronoi(&alloc).unwrap();
        let adj = inst.agent_adjacency(&part);
        let owners = oracle_voronoi(&env, &pos);
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let touch = env.edges().iter().any(|&(a, b)| {
                    (owners[a] == i && owners[b] == j) || (owners[a] == j && owners[b] == i)
                });
                prop_assert_eq!(adj.contains(i, j), touch);
            }
        }
    }

    #[test]
    fn adding_an_agent_never_hurts((env, pos) in placed(12, 4), extra in any::<prop::sample::Index>()) {
        let free: Vec<usize> = (0..env.node_count()).filter(|c| !pos.contains(c)).collect();
        prop_assume!(!free.is_empty());
        let x = free[extra.index(free.len())];
        let mut more = pos.clone();
        more.push(x);
        prop_assert!(oracle_objective(&env, &more, None) >= oracle_objective(&env, &pos, None) - 1e-12);
    }

    #[test]
    fn marginal_gains_shrink((env, pos) in placed(12, 4), extra in any::<prop::sample::Index>(), cut in any::<prop::sample::Index>()) {
        // A subset of B: the gain of x on A is at least its gain on B.
        let free: Vec<usize> = (0..env.node_count()).filter(|c| !pos.contains(c)).collect();
        prop_assume!(!free.is_empty());
        let x = free[extra.index(free.len())];
        let big = pos.clone();
        let small = &pos[..cut.index(pos.len() + 1)];
        let gain = |base: &[usize]| {
            let mut with = base.to_vec();
            with.push(x);
            oracle_objective(&env, &with, None) - oracle_objective(&env, base, None)
        };
        prop_assert!(gain(small) >= gain(&big) - 1e-12);
    }

    #[test]
    fn best_placement_matches_enumeration((env, pos) in placed(12, 3), k in 1usize..=2) {
        let inst = instance(env.clone());
        let alloc = Allocation::new(pos.clone(), env.node_count()).unwrap();
        let part = inst.voronoi(&alloc).unwrap();
        let block = part.block(0).to_vec();
        prop_assume!(block.len() > k);
        let fixed = [pos[0]];
        let placement = inst.best_placement(&block, &fixed, k).unwrap();
        let base = oracle_objective(&env, &fixed, Some(&block));
        let free: Vec<usize> = block.iter().copied().filter(|&c| c != pos[0]).collect();
        let mut best = f64::NEG_INFINITY;
        for_each_subset(free.len(), k, |s| {
            let mut p = fixed.to_vec();
            p.extend(s.iter().map(|&a| free[a]));
            best = best.max(oracle_objective(&env, &p, Some(&block)) - base);
        });
        prop_assert!((placement.gain - best).abs() < 1e-9);
        let mut p = fixed.to_vec();
        p.extend(&placement.nodes);
        prop_assert!((oracle_objective(&env, &p, Some(&block)) - base - placement.gain).abs() < 1e-9);
        let m = inst.marginal_gain(&block, &fixed, k).unwrap();
        prop_assert!((m - best).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solver_potential_rises_and_certifies((env, pos) in placed(12, 4)) {
        prop_assume!(pos.len() >= 2);
        let inst = instance(env.clone());
        let alloc = Allocation::new(pos.clone(), env.node_count()).unwrap();
        let out = run_nbo(&inst, &NboConfig::default(), alloc).unwrap();
        prop_assert!(out.phi_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        prop_assert!(out.converged());
        prop_assert!(out.certificate.holds(1e-9));
        let opt = oracle_opt(&env, pos.len());
        prop_assert!(out.objective >= 0.5 * opt - 1e-9);
        prop_assert!((out.objective - oracle_objective(&env, out.allocation.positions(), None)).abs() < 1e-9);
    }
}
