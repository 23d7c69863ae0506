mod common;

use common::*;
use covctl::baselines::{opt_bruteforce, sota_run, vvp_run};
use covctl::coverage::Allocation;
use covctl::nbo::{
    classify, global_info, potential, run_nbo, step_b, CommTree, EdgeScope, NboConfig, SolverState,
    StateClass, Step,
};

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;
const E: usize = 4;
const F: usize = 5;

fn example_state() -> (covctl::coverage::Instance, SolverState) {
    let inst = instance(example_grid());
    let alloc = Allocation::new(example_positions(), inst.node_count()).unwrap();
    let state = SolverState::new(&inst, alloc, 0).unwrap();
    (inst, state)
}

#[test]
fn grid_example_objective() {
    let env = example_grid();
    assert_eq!(env.valued().len(), 33);
    let inst = instance(env.clone());
    let g = inst.objective(&example_positions()).unwrap();
    assert!((g - 16.4).abs() < 1e-9, "G = {g}");
    assert!((g - oracle_objective(&env, &example_positions(), None)).abs() < 1e-12);

    let mut moved = example_positions();
    moved[E] = cell(7, 3);
    let g2 = inst.objective(&moved).unwrap();
    // Exactly 16 + 11/12; quoted as roughly 16.8.
    assert!((g2 - (16.0 + 11.0 / 12.0)).abs() < 1e-9, "G' = {g2}");
    assert!((g2 - 16.8).abs() < 0.15);
    assert!((g2 - oracle_objective(&env, &moved, None)).abs() < 1e-12);
}

#[test]
fn grid_example_voronoi_and_utilities() {
    let (inst, state) = example_state();
    let owners = oracle_voronoi(inst.env(), &example_positions());
    for (node, &o) in owners.iter().enumerate() {
        assert_eq!(state.partition().owner(node), Some(o), "node {node}");
    }
    let u = state.utilities();
    let expected = [1.0, 1.5, 19.0 / 6.0, 4.2, 151.0 / 30.0, 1.5];
    for k in 0..6 {
        assert!((u[k] - expected[k]).abs() < 1e-9, "u[{k}] = {}", u[k]);
    }
    assert!((u.iter().sum::<f64>() - 16.4).abs() < 1e-9);
    assert_eq!(state.adjacency().neighbors(E), &[C, D, F]);
    assert_eq!(
        state.adjacency().edges(),
        vec![(A, B), (B, C), (B, D), (C, D), (C, E), (D, E), (E, F)]
    );
}

#[test]
fn grid_example_global_info() {
    let (inst, mut state) = example_state();
    assert!((state.m1()[E] - 22.0 / 15.0).abs() < 1e-9);
    assert!((state.m1()[D] - 22.0 / 15.0).abs() < 1e-9);
    let info = global_info(&state);
    assert_eq!(info.i_min, A);
    assert_eq!(info.u_min, 1.0);
    // d and e tie on the largest gain; the lower id wins.
    assert_eq!(info.i_max_plus, D);
    assert!((info.v - 22.0 / 15.0).abs() < 1e-9);
    assert_eq!(
        classify(&inst, &mut state, &info, EdgeScope::Tree).unwrap(),
        StateClass::Z1
    );
    assert!((potential(&state, &info) - (16.4 + 22.0 / 15.0 - 1.0)).abs() < 1e-9);
    assert_eq!(state.tree().root(), A);
}

#[test]
fn grid_example_step_b_on_hand_built_tree() {
    let (inst, mut state) = example_state();
    let tree =
        CommTree::from_parents(vec![None, Some(A), Some(B), Some(C), Some(C), Some(E)]).unwrap();
    state.set_tree(tree).unwrap();
    let info = global_info(&state);
    let phi0 = potential(&state, &info);
    let region = state.partition().union(D, C);
    let others: Vec<Vec<usize>> = [A, B, E, F]
        .iter()
        .map(|&k| state.partition().block(k).to_vec())
        .collect();

    let report = step_b(&inst, &mut state, &info, D, C).unwrap();
    assert_eq!(report.step, Step::B);
    assert!(report.changed);
    assert_eq!(report.region_size, region.len());
    assert!(matches!(report.merged_into, Some(C) | Some(D)));
    assert_eq!(state.partition().union(D, C), region);
    for (k, block) in [A, B, E, F].iter().zip(&others) {
        assert_eq!(state.partition().block(*k), block.as_slice());
    }
    state.rebuild_tree().unwrap();
    let phi1 = potential(&state, &global_info(&state));
    assert!(phi1 >= phi0 - 1e-9, "{phi0} -> {phi1}");
}

#[test]
fn grid_example_solver_run() {
    let (inst, _) = example_state();
    let alloc = Allocation::new(example_positions(), inst.node_count()).unwrap();
    let out = run_nbo(&inst, &NboConfig::default(), alloc).unwrap();
    assert!(out.converged());
    assert_eq!(out.class, StateClass::Z4);
    assert!(out.objective > 16.4);
    assert!(out.certificate.holds(1e-9));
}

fn path_run(alg: &str, start: [usize; 2]) -> (Vec<usize>, f64) {
    let inst = instance(unit_path(12));
    let alloc = Allocation::new(start.to_vec(), 12).unwrap();
    let r = match alg {
        "sota" => sota_run(&inst, alloc).unwrap(),
        "vvp" => vvp_run(&inst, 500, alloc).unwrap(),
        _ => {
            let o = run_nbo(&inst, &NboConfig::default(), alloc).unwrap();
            return (o.allocation.positions().to_vec(), o.objective);
        }
    };
    (r.allocation.positions().to_vec(), r.objective)
}

#[test]
fn unit_path_optimum() {
    let env = unit_path(12);
    let opt = oracle_opt(&env, 2);
    assert!((opt - 35.0 / 6.0).abs() < 1e-12);
    let bf = opt_bruteforce(&instance(env), 2, 1_000).unwrap();
    assert!((bf.objective - opt).abs() < 1e-12);
    let mut best = bf.allocation.positions().to_vec();
    best.sort();
    assert_eq!(best, vec![2, 8]);
}

#[test]
fn unit_path_solver_reaches_optimum_from_the_left_end() {
    let opt = oracle_opt(&unit_path(12), 2);
    for start in [[0, 1], [1, 0]] {
        let (_, g) = path_run("nbo", start);
        assert!((g - opt).abs() < 1e-9, "{start:?}: {g}");
    }
}

#[test]
fn unit_path_pairwise_coordination_stays_below_optimum() {
    let opt = oracle_opt(&unit_path(12), 2);
    let (pos, g0) = path_run("sota", [0, 1]);
    assert_eq!(pos, vec![0, 3]);
    assert!(g0 < opt - 1e-3);
    let (pos, g1) = path_run("sota", [1, 0]);
    assert_eq!(pos, vec![7, 2]);
    assert!(g1 > g0 + 1e-3 && g1 < opt - 1e-3, "{g0} {g1} {opt}");
}

#[test]
fn unit_path_best_response() {
    let (pos, _) = path_run("vvp", [0, 1]);
    assert_eq!(pos, vec![2, 8]);
    let (pos, g) = path_run("vvp", [1, 0]);
    assert_eq!(pos, vec![7, 1]);
    assert!((g - 5.7).abs() < 1e-9);
}
