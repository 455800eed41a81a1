use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ConstraintSense, InstanceBuilder, MipInstance, ObjectiveSense, VarKind};

const ADD_ITEM_PROB: f64 = 0.65;

fn build(b: InstanceBuilder) -> MipInstance {
    b.build().expect("generated instances are well formed")
}

pub(super) fn combinatorial_auction(name: &str, n_items: usize, n_bids: usize, rng: &mut ChaCha8Rng) -> MipInstance {
    let values: Vec<f64> = (0..n_items).map(|_| rng.gen_range(1.0..=100.0)).collect();
    let mut bids_on: Vec<Vec<usize>> = vec![Vec::new(); n_items];
    let mut b = InstanceBuilder::new(name, ObjectiveSense::Maximize);
    for k in 0..n_bids {
        let mut bundle = BTreeSet::new();
        bundle.insert(rng.gen_range(0..n_items));
        while bundle.len() < n_items && rng.gen_bool(ADD_ITEM_PROB) {
            loop {
                let item = rng.gen_range(0..n_items);
                if bundle.insert(item) {
                    break;
                }
            }
        }
        let premium = 1.0 + 0.2 * rng.gen::<f64>();
        let price = bundle.iter().map(|&i| values[i]).sum::<f64>() * premium;
        let var = b
            .add_variable(format!("bid{k}"), 0.0, 1.0, VarKind::Binary, price)
            .expect("unique names");
        for &i in &bundle {
            bids_on[i].push(var);
        }
    }
    for (i, bids) in bids_on.iter().enumerate() {
        if !bids.is_empty() {
            let terms = bids.iter().map(|&v| (v, 1.0)).collect();
            b.add_constraint(format!("item{i}"), terms, ConstraintSense::Le, 1.0)
                .expect("valid terms");
        }
    }
    build(b)
}

pub(super) fn set_cover(name: &str, n_rows: usize, n_cols: usize, density: f64, rng: &mut ChaCha8Rng) -> MipInstance {
    let mut rows: Vec<BTreeSet<usize>> = (0..n_rows)
        .map(|_| (0..n_cols).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    let mut col_count = vec![0usize; n_cols];
    for r in &rows {
        for &j in r {
            col_count[j] += 1;
        }
    }
    // Repair: every column covers a row, every row is covered twice.
    for j in 0..n_cols {
        if col_count[j] == 0 {
            rows[rng.gen_range(0..n_rows)].insert(j);
            col_count[j] += 1;
        }
    }
    for r in rows.iter_mut() {
        while r.len() < 2 {
            r.insert(rng.gen_range(0..n_cols));
        }
    }
    let mut b = InstanceBuilder::new(name, ObjectiveSense::Minimize);
    for j in 0..n_cols {
        let cost = rng.gen_range(1..=100) as f64;
        b.add_variable(format!("x{j}"), 0.0, 1.0, VarKind::Binary, cost)
            .expect("unique names");
    }
    for (i, r) in rows.iter().enumerate() {
        let terms = r.iter().map(|&j| (j, 1.0)).collect();
        b.add_constraint(format!("cover{i}"), terms, ConstraintSense::Ge, 1.0)
            .expect("valid terms");
    }
    build(b)
}

pub(super) fn facility_location(
    name: &str,
    n_customers: usize,
    n_facilities: usize,
    ratio: f64,
    rng: &mut ChaCha8Rng,
) -> MipInstance {
    let point = |rng: &mut ChaCha8Rng| (rng.gen::<f64>(), rng.gen::<f64>());
    let customers: Vec<(f64, f64)> = (0..n_customers).map(|_| point(rng)).collect();
    let facilities: Vec<(f64, f64)> = (0..n_facilities).map(|_| point(rng)).collect();
    let demand: Vec<f64> = (0..n_customers).map(|_| rng.gen_range(5..=35) as f64).collect();
    let raw_cap: Vec<f64> = (0..n_facilities).map(|_| rng.gen_range(10..=160) as f64).collect();
    let total_demand: f64 = demand.iter().sum();
    let scale = ratio * total_demand / raw_cap.iter().sum::<f64>();
    let capacity: Vec<f64> = raw_cap.iter().map(|c| c * scale).collect();
    let fixed: Vec<f64> = capacity
        .iter()
        .map(|c| rng.gen_range(0.0..=90.0) * c.sqrt() + rng.gen_range(100.0..=110.0))
        .collect();

    let mut b = InstanceBuilder::new(name, ObjectiveSense::Minimize);
    let open: Vec<usize> = (0..n_facilities)
        .map(|j| {
            b.add_variable(format!("open{j}"), 0.0, 1.0, VarKind::Binary, fixed[j])
                .expect("unique names")
        })
        .collect();
    let mut serve = vec![vec![0usize; n_facilities]; n_customers];
    for i in 0..n_customers {
        for j in 0..n_facilities {
            let (dx, dy) = (customers[i].0 - facilities[j].0, customers[i].1 - facilities[j].1);
            let cost = 10.0 * demand[i] * (dx * dx + dy * dy).sqrt();
            serve[i][j] = b
                .add_variable(format!("serve{i}_{j}"), 0.0, 1.0, VarKind::Continuous, cost)
                .expect("unique names");
        }
    }
    for i in 0..n_customers {
        let terms = (0..n_facilities).map(|j| (serve[i][j], 1.0)).collect();
        b.add_constraint(format!("demand{i}"), terms, ConstraintSense::Ge, 1.0)
            .expect("valid terms");
    }
    for j in 0..n_facilities {
        let mut terms: Vec<(usize, f64)> = (0..n_customers).map(|i| (serve[i][j], demand[i])).collect();
        terms.push((open[j], -capacity[j]));
        b.add_constraint(format!("capacity{j}"), terms, ConstraintSense::Le, 0.0)
            .expect("valid terms");
    }
    let terms = (0..n_facilities).map(|j| (open[j], capacity[j])).collect();
    b.add_constraint("total_capacity", terms, ConstraintSense::Ge, total_demand)
        .expect("valid terms");
    for i in 0..n_customers {
        for j in 0..n_facilities {
            b.add_constraint(
                format!("link{i}_{j}"),
                vec![(serve[i][j], 1.0), (open[j], -1.0)],
                ConstraintSense::Le,
                0.0,
            )
            .expect("valid terms");
        }
    }
    build(b)
}

/// Barabási–Albert preferential attachment: a clique on `affinity + 1`
/// nodes, then every further node links to `affinity` distinct existing
/// nodes chosen with probability proportional to their degree.
pub fn barabasi_albert(n_nodes: usize, affinity: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut degree = vec![0usize; n_nodes];
    let seed_size = (affinity + 1).min(n_nodes);
    for u in 0..seed_size {
        for v in (u + 1)..seed_size {
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    for v in seed_size..n_nodes {
        let total: usize = degree[..v].iter().sum();
        let mut targets = BTreeSet::new();
        while targets.len() < affinity {
            let mut r = rng.gen_range(0..total);
            let mut u = 0;
            while r >= degree[u] {
                r -= degree[u];
                u += 1;
            }
            targets.insert(u);
        }
        for &u in &targets {
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    edges
}

pub(super) fn independent_set(name: &str, n_nodes: usize, affinity: usize, rng: &mut ChaCha8Rng) -> MipInstance {
    let edges = barabasi_albert(n_nodes, affinity, rng);
    let mut b = InstanceBuilder::new(name, ObjectiveSense::Maximize);
    for v in 0..n_nodes {
        b.add_variable(format!("node{v}"), 0.0, 1.0, VarKind::Binary, 1.0)
            .expect("unique names");
    }
    for (k, &(u, v)) in edges.iter().enumerate() {
        b.add_constraint(format!("edge{k}"), vec![(u, 1.0), (v, 1.0)], ConstraintSense::Le, 1.0)
            .expect("valid terms");
    }
    build(b)
}
