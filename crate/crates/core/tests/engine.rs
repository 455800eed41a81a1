mod common;

use std::sync::Arc;

use branchgym::bnb::{
    Counters, Engine, EngineEvent, EngineParams, NodeSelection, ParamMap, ParamValue, PruneReason,
    SolveStatus,
};
use branchgym::model::{MipInstance, ObjectiveSense};
use common::{brute_force_binary, knapsack_fixture, random_binary_mip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine(inst: &MipInstance, params: &[(&str, ParamValue)]) -> Engine {
    let mut e = Engine::new(Arc::new(inst.clone()), EngineParams::default(), 7).unwrap();
    let map: ParamMap = params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    e.set_params(&map).unwrap();
    e
}

fn check_outcome(e: &Engine, expected: Option<f64>, seed: u64) {
    match expected {
        Some(best) => {
            assert_eq!(e.status(), SolveStatus::Optimal, "seed {seed}");
            assert!((e.primal_bound() - best).abs() <= 1e-6, "seed {seed}: {} vs {best}", e.primal_bound());
        }
        None => assert_eq!(e.status(), SolveStatus::Infeasible, "seed {seed}"),
    }
}

/// Replays the event log: bound sandwich, monotone dual bound and
/// non-decreasing counters, all in minimization form.
fn check_trace(e: &Engine) {
    let mut last = None;
    for ev in e.events() {
        if let EngineEvent::NodeSolved { counters, .. } = ev {
            if let Some(prev) = last {
                let prev: Counters = prev;
                assert!(counters.nodes_processed > prev.nodes_processed);
                assert!(counters.lp_iterations_total >= prev.lp_iterations_total);
            }
            last = Some(*counters);
        }
    }
    let mut prev_dual = f64::NEG_INFINITY;
    for s in e.bound_history() {
        assert!(s.dual >= prev_dual - 1e-9);
        if s.primal.is_finite() {
            assert!(s.dual <= s.primal + 1e-6);
        }
        prev_dual = s.dual;
    }
}

#[test]
fn autosolve_matches_brute_force() {
    for seed in 0..100 {
        let inst = random_binary_mip(seed);
        let expected = brute_force_binary(&inst);
        for rule in ["pseudocost", "most_infeasible", "random"] {
            let mut e = engine(&inst, &[("branching_rule", rule.into())]);
            e.autosolve().unwrap();
            check_outcome(&e, expected, seed);
            check_trace(&e);
        }
    }
}

#[test]
fn external_random_policy_matches_brute_force() {
    for seed in 0..100 {
        let inst = random_binary_mip(seed);
        let expected = brute_force_binary(&inst);
        for selection in ["best_bound", "dfs"] {
            let mut e = engine(&inst, &[("node_selection", selection.into())]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            e.start().unwrap();
            while e.status() == SolveStatus::AwaitingBranch {
                let c = e.candidate_indices();
                e.branch(c[rng.gen_range(0..c.len())]).unwrap();
            }
            check_outcome(&e, expected, seed);
            check_trace(&e);
        }
    }
}

#[test]
fn knapsack_reaches_enumerated_optimum() {
    let inst = knapsack_fixture();
    assert_eq!(inst.sense(), ObjectiveSense::Maximize);
    let mut e = engine(&inst, &[("rounding_heuristic", false.into())]);
    assert_eq!(e.start().unwrap(), SolveStatus::AwaitingBranch);
    assert_eq!(e.candidate_indices(), vec![0]);
    e.branch(0).unwrap();
    while e.status() == SolveStatus::AwaitingBranch {
        let j = e.candidate_indices()[0];
        e.branch(j).unwrap();
    }
    assert_eq!(e.status(), SolveStatus::Optimal);
    assert!((e.primal_bound() - brute_force_binary(&inst).unwrap()).abs() < 1e-9);
    assert_eq!(e.incumbent().unwrap().values, vec![1.0, 0.0]);
}

#[test]
fn node_count_identity_holds_on_event_log() {
    for seed in 0..60 {
        let inst = random_binary_mip(seed);
        let mut e = engine(&inst, &[]);
        e.autosolve().unwrap();
        let branched = e
            .events()
            .iter()
            .filter(|ev| matches!(ev, EngineEvent::Branched { .. }))
            .count() as u64;
        let pruned_early = e
            .events()
            .iter()
            .filter(|ev| matches!(ev, EngineEvent::NodePruned { before_lp: true, .. }))
            .count() as u64;
        let solved = e
            .events()
            .iter()
            .filter(|ev| matches!(ev, EngineEvent::NodeSolved { .. }))
            .count() as u64;
        let c = e.counters();
        assert_eq!(c.nodes_processed, 1 + 2 * branched - pruned_early, "seed {seed}");
        assert_eq!(c.nodes_processed, solved);
        assert_eq!(c.nodes_created, 1 + 2 * branched);
    }
}

fn solved_order(e: &Engine) -> Vec<(u64, u32)> {
    e.events()
        .iter()
        .filter_map(|ev| match ev {
            EngineEvent::NodeSolved { node, depth, .. } => Some((*node, *depth)),
            _ => None,
        })
        .collect()
}

#[test]
fn dfs_dives_before_backtracking() {
    // Find an instance whose tree is deep enough to tell the orders apart.
    let mut differing = 0;
    for seed in 0..100 {
        let inst = random_binary_mip(seed);
        let mut bb = engine(&inst, &[("rounding_heuristic", false.into())]);
        let mut dfs = engine(
            &inst,
            &[("rounding_heuristic", false.into()), ("node_selection", "dfs".into())],
        );
        bb.autosolve().unwrap();
        dfs.autosolve().unwrap();
        assert_eq!(dfs.params().node_selection, NodeSelection::Dfs);
        let order = solved_order(&dfs);
        // Depth-first: the node picked right after a branching is always
        // its down child.
        let evs = dfs.events();
        for (i, ev) in evs.iter().enumerate() {
            if let EngineEvent::Branched { down_child, .. } = ev {
                let next = evs[i + 1..].iter().find_map(|e| match e {
                    EngineEvent::NodeSolved { node, .. } => Some(*node),
                    EngineEvent::NodePruned { node, before_lp: true, .. } => Some(*node),
                    _ => None,
                });
                assert_eq!(next, Some(*down_child), "seed {seed}");
            }
        }
        if solved_order(&bb) != order {
            differing += 1;
        }
    }
    assert!(differing > 0, "dfs never changed the node order");
}

#[test]
fn same_inputs_give_identical_logs() {
    for seed in 0..20 {
        let inst = random_binary_mip(seed);
        let run = || {
            let mut e = engine(&inst, &[("branching_rule", "random".into())]);
            e.autosolve().unwrap();
            (serde_json::to_string(e.events()).unwrap(), e.counters())
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn integral_children_close_the_tree() {
    let inst = knapsack_fixture();
    let mut e = engine(&inst, &[]);
    e.autosolve().unwrap();
    assert!(e
        .events()
        .iter()
        .any(|ev| matches!(ev, EngineEvent::NodePruned { reason: PruneReason::Integral, .. })
            || matches!(ev, EngineEvent::IncumbentFound { .. })));
}
