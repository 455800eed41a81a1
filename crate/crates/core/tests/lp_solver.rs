mod common;

use branchgym::lp::{lp_feasibility_residual, solve_lp, LpStatus, SimplexOptions};
use common::{degenerate_lp, random_lp, residual, vertex_enumeration_optimum};
use proptest::prelude::*;

fn opts() -> SimplexOptions {
    SimplexOptions::default()
}

#[test]
fn seeded_lps_match_vertex_enumeration() {
    let mut infeasible = 0;
    for seed in 0..200 {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp, None, &opts()).unwrap();
        match vertex_enumeration_optimum(&lp) {
            Some(best) => {
                assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
                assert!((sol.objective - best).abs() <= 1e-6, "seed {seed}: {} vs {best}", sol.objective);
                assert!(residual(&lp, &sol.primal) <= 1e-6, "seed {seed}");
            }
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "seed {seed}");
            }
        }
    }
    assert!(infeasible < 100, "generator should mostly produce feasible LPs");
}

#[test]
fn strong_duality_at_optimum() {
    for seed in 0..200 {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp, None, &opts()).unwrap();
        if sol.status == LpStatus::Optimal {
            let gap = (sol.objective - sol.dual_objective).abs();
            assert!(gap <= 1e-6 * (1.0 + sol.objective.abs()), "seed {seed}: gap {gap}");
        }
    }
}

#[test]
fn oracle_vertex_has_zero_residual() {
    // The library residual agrees with the independent one on solver output.
    for seed in 0..50 {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp, None, &opts()).unwrap();
        if sol.status == LpStatus::Optimal {
            let r = lp_feasibility_residual(&lp, &sol.primal).unwrap();
            assert!(r <= 1e-6);
            assert!((r - residual(&lp, &sol.primal)).abs() < 1e-12);
        }
    }
}

#[test]
fn degenerate_lps_terminate() {
    for seed in 0..1000 {
        let lp = degenerate_lp(seed);
        let sol = solve_lp(&lp, None, &opts()).unwrap();
        assert_ne!(sol.status, LpStatus::IterationLimit, "seed {seed}");
        let best = vertex_enumeration_optimum(&lp);
        match best {
            Some(b) => assert!((sol.objective - b).abs() <= 1e-6, "seed {seed}"),
            None => assert_eq!(sol.status, LpStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn degenerate_lps_terminate_under_immediate_bland() {
    let o = SimplexOptions { bland_after: 0, ..opts() };
    for seed in 0..1000 {
        let sol = solve_lp(&degenerate_lp(seed), None, &o).unwrap();
        assert_ne!(sol.status, LpStatus::IterationLimit, "seed {seed}");
    }
}

fn perturbed_bounds(lp: &branchgym::lp::LinearProgram, j: usize, tighten_upper: bool) -> (Vec<f64>, Vec<f64>) {
    let mut lo = lp.col_lower().to_vec();
    let mut up = lp.col_upper().to_vec();
    let mid = ((lo[j] + up[j]) / 2.0).floor();
    if tighten_upper {
        up[j] = mid.max(lo[j]);
    } else {
        lo[j] = (mid + 1.0).min(up[j]);
    }
    (lo, up)
}

proptest! {
    #[test]
    fn warm_and_cold_solves_agree(seed in 0u64..5000, pick in 0usize..8, upper in any::<bool>()) {
        let lp = random_lp(seed);
        let first = solve_lp(&lp, None, &opts()).unwrap();
        let j = pick % lp.n_vars();
        let (lo, up) = perturbed_bounds(&lp, j, upper);
        let child = lp.with_bounds(lo, up).unwrap();
        let cold = solve_lp(&child, None, &opts()).unwrap();
        let warm = solve_lp(&child, Some(&first.basis), &opts()).unwrap();
        prop_assert_eq!(cold.status, warm.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((cold.objective - warm.objective).abs() <= 1e-6 * (1.0 + cold.objective.abs()));
        }
    }

    #[test]
    fn tightening_a_bound_never_improves(seed in 0u64..5000, pick in 0usize..8, upper in any::<bool>()) {
        let lp = random_lp(seed);
        let parent = solve_lp(&lp, None, &opts()).unwrap();
        prop_assume!(parent.status == LpStatus::Optimal);
        let j = pick % lp.n_vars();
        let (lo, up) = perturbed_bounds(&lp, j, upper);
        let child = solve_lp(&lp.with_bounds(lo, up).unwrap(), Some(&parent.basis), &opts()).unwrap();
        if child.status == LpStatus::Optimal {
            prop_assert!(child.objective >= parent.objective - 1e-6);
        } else {
            prop_assert_eq!(child.status, LpStatus::Infeasible);
        }
    }
}
