//! Independent oracles shared by the integration suites. Nothing here calls
//! the simplex solver or the branch-and-bound engine.
#![allow(dead_code)]

use branchgym::lp::{LinearProgram, LpRow, RowSense};
use branchgym::model::{ConstraintSense, InstanceBuilder, MipInstance, ObjectiveSense, VarKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LP with finite column bounds, at most 8 columns and 8 rows.
pub fn random_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(0..=8);
    let objective: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(-10.0..10.0) })
        .collect();
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=1) as f64).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0..=8) as f64).collect();
    let anchor: Vec<f64> = (0..n).map(|j| rng.gen_range(lower[j]..=upper[j])).collect();
    let rows = (0..m)
        .map(|_| {
            let mut terms = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    terms.push((j, rng.gen_range(-6..=6) as f64 + rng.gen_range(0.0..1.0)));
                }
            }
            let act: f64 = terms.iter().map(|&(j, a)| a * anchor[j]).sum();
            let sense = match rng.gen_range(0..5) {
                0 | 1 => RowSense::Le,
                2 | 3 => RowSense::Ge,
                _ => RowSense::Eq,
            };
            // Mostly feasible around the anchor; sometimes shifted past it.
            let shift = rng.gen_range(-2.0..6.0);
            let rhs = match sense {
                RowSense::Le => act + shift,
                RowSense::Ge => act - shift,
                RowSense::Eq => act,
            };
            LpRow::new(terms, sense, rhs)
        })
        .collect();
    LinearProgram::new(objective, lower, upper, rows).unwrap()
}

/// Highly degenerate LP: many rows through a common vertex.
pub fn degenerate_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdead_beef);
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(2..=6);
    let objective = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    let upper = (0..n).map(|_| rng.gen_range(1..=3) as f64).collect();
    let rows = (0..m)
        .map(|_| {
            let terms = (0..n).map(|j| (j, rng.gen_range(-2..=2) as f64)).collect();
            let rhs = if rng.gen_bool(0.75) { 0.0 } else { rng.gen_range(0..=2) as f64 };
            LpRow::new(terms, if rng.gen_bool(0.5) { RowSense::Le } else { RowSense::Ge }, rhs)
        })
        .collect();
    LinearProgram::new(objective, vec![0.0; n], upper, rows).unwrap()
}

/// Minimum objective over all vertices of a bounded LP, by enumerating every
/// choice of `n` active hyperplanes (rows or column bounds). `None` when no
/// vertex is feasible.
pub fn vertex_enumeration_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    let m = lp.n_rows();
    assert!(lp.col_lower().iter().chain(lp.col_upper()).all(|v| v.is_finite()));
    // Equality rows need not be among the chosen hyperplanes: the
    // feasibility check enforces them, and any vertex is pinned by some
    // linearly independent subset of its tight constraints.
    let empty_rows: u32 = (0..m)
        .filter(|&i| lp.row(i).terms.is_empty())
        .fold(0, |acc, i| acc | (1 << i));
    let mut best: Option<f64> = None;

    for row_mask in 0u32..(1 << m) {
        if row_mask & empty_rows != 0 {
            continue;
        }
        let k = row_mask.count_ones() as usize;
        if k > n {
            continue;
        }
        // Choose which n-k columns sit at a bound, and which bound.
        for fixed_mask in 0u32..(1 << n) {
            if fixed_mask.count_ones() as usize != n - k {
                continue;
            }
            for side in 0u32..(1 << n) {
                if side & !fixed_mask != 0 {
                    continue;
                }
                if let Some(x) = solve_active_set(lp, row_mask, fixed_mask, side) {
                    if residual(lp, &x) <= 1e-7 {
                        let obj = lp.objective_value(&x);
                        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                    }
                }
            }
        }
    }
    best
}

fn solve_active_set(lp: &LinearProgram, rows: u32, fixed: u32, side: u32) -> Option<Vec<f64>> {
    let n = lp.n_vars();
    let mut x = vec![0.0; n];
    let free: Vec<usize> = (0..n).filter(|j| fixed & (1 << j) == 0).collect();
    for j in 0..n {
        if fixed & (1 << j) != 0 {
            x[j] = if side & (1 << j) != 0 { lp.col_upper()[j] } else { lp.col_lower()[j] };
        }
    }
    let active: Vec<usize> = (0..lp.n_rows()).filter(|i| rows & (1 << i) != 0).collect();
    let k = free.len();
    debug_assert_eq!(k, active.len());
    if k == 0 {
        return Some(x);
    }
    let mut a = vec![vec![0.0; k + 1]; k];
    for (r, &i) in active.iter().enumerate() {
        let row = lp.row(i);
        let mut rhs = row.rhs;
        for &(j, coef) in &row.terms {
            match free.iter().position(|&f| f == j) {
                Some(c) => a[r][c] += coef,
                None => rhs -= coef * x[j],
            }
        }
        a[r][k] = rhs;
    }
    let sol = gauss_solve(a, k)?;
    for (c, &j) in free.iter().enumerate() {
        x[j] = sol[c];
    }
    Some(x)
}

fn gauss_solve(mut a: Vec<Vec<f64>>, k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(piv, col);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..k).map(|r| a[r][k] / a[r][r]).collect())
}

/// Maximum violation, computed without the library's residual routine.
pub fn residual(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..lp.n_vars() {
        worst = worst.max(lp.col_lower()[j] - x[j]).max(x[j] - lp.col_upper()[j]);
    }
    for row in lp.rows() {
        let act: f64 = row.terms.iter().map(|&(j, a)| a * x[j]).sum();
        worst = worst.max(match row.sense {
            RowSense::Le => act - row.rhs,
            RowSense::Ge => row.rhs - act,
            RowSense::Eq => (act - row.rhs).abs(),
        });
    }
    worst
}

/// Random pure-binary MIP with at most 12 variables.
pub fn random_binary_mip(seed: u64) -> MipInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0x51);
    let n = rng.gen_range(4..=12);
    let m = rng.gen_range(1..=8);
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Minimize } else { ObjectiveSense::Maximize };
    let mut b = InstanceBuilder::new(format!("binary-{seed}"), sense);
    for j in 0..n {
        let c = rng.gen_range(-20..=20) as f64 + if rng.gen_bool(0.3) { 0.5 } else { 0.0 };
        b.add_variable(format!("x{j}"), 0.0, 1.0, VarKind::Binary, c).unwrap();
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.5) {
                terms.push((j, rng.gen_range(-9..=9) as f64));
            }
        }
        let total: f64 = terms.iter().map(|t| t.1.abs()).sum();
        let sense = match rng.gen_range(0..6) {
            0..=2 => ConstraintSense::Le,
            3..=4 => ConstraintSense::Ge,
            _ => ConstraintSense::Eq,
        };
        let rhs = match sense {
            ConstraintSense::Eq => rng.gen_range(-3..=3) as f64,
            _ => (rng.gen_range(-0.3..0.6) * total).round(),
        };
        b.add_constraint(format!("c{i}"), terms, sense, rhs).unwrap();
    }
    b.build().unwrap()
}

/// Best objective (in the instance's own sense) over all 0/1 assignments.
pub fn brute_force_binary(instance: &MipInstance) -> Option<f64> {
    let n = instance.variables().len();
    assert!(n <= 16);
    assert!(instance.variables().iter().all(|v| v.kind == VarKind::Binary));
    let maximize = instance.sense() == ObjectiveSense::Maximize;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        let bounds_ok = instance
            .variables()
            .iter()
            .zip(&x)
            .all(|(v, &xv)| xv >= v.lower && xv <= v.upper);
        let rows_ok = instance.constraints().iter().all(|c| {
            let act: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            match c.sense {
                ConstraintSense::Le => act <= c.rhs + 1e-9,
                ConstraintSense::Ge => act >= c.rhs - 1e-9,
                ConstraintSense::Eq => (act - c.rhs).abs() <= 1e-9,
            }
        });
        if !(bounds_ok && rows_ok) {
            continue;
        }
        let obj: f64 = instance.variables().iter().zip(&x).map(|(v, xv)| v.objective * xv).sum();
        best = Some(match best {
            None => obj,
            Some(b) if maximize => b.max(obj),
            Some(b) => b.min(obj),
        });
    }
    best
}

/// `max 5x + 4y  s.t. 3x + 2y <= 4`, binaries.
pub fn knapsack_fixture() -> MipInstance {
    let mut b = InstanceBuilder::new("knapsack", ObjectiveSense::Maximize);
    let x = b.add_variable("x", 0.0, 1.0, VarKind::Binary, 5.0).unwrap();
    let y = b.add_variable("y", 0.0, 1.0, VarKind::Binary, 4.0).unwrap();
    b.add_constraint("cap", vec![(x, 3.0), (y, 2.0)], ConstraintSense::Le, 4.0).unwrap();
    b.build().unwrap()
}
