mod common;

use std::sync::Arc;

use branchgym::bnb::{Engine, EngineParams, SolveStatus};
use branchgym::generators::{
    preset, Family, GeneratorConfig, InstanceGenerator, Tier,
};
use branchgym::model::native::fingerprint;
use branchgym::model::{read_problem, write_problem, MipInstance, VarKind};
use common::residual;

fn instance(cfg: GeneratorConfig, seed: u64, index: u64) -> MipInstance {
    InstanceGenerator::new(cfg, seed).unwrap().generate(index)
}

#[test]
fn same_seed_same_hash() {
    for family in Family::ALL {
        let cfg = preset(family, Tier::Desk);
        assert_eq!(fingerprint(&instance(cfg, 11, 0)), fingerprint(&instance(cfg, 11, 0)));
        assert_ne!(fingerprint(&instance(cfg, 11, 0)), fingerprint(&instance(cfg, 12, 0)));
        assert_ne!(fingerprint(&instance(cfg, 11, 0)), fingerprint(&instance(cfg, 11, 1)));
    }
}

#[test]
fn instance_k_ignores_earlier_draws() {
    for family in Family::ALL {
        let cfg = preset(family, Tier::Desk);
        let mut stream = InstanceGenerator::new(cfg, 4).unwrap();
        let third = stream.nth(3).unwrap();
        assert_eq!(fingerprint(&third), fingerprint(&instance(cfg, 4, 3)));
    }
}

#[test]
fn auction_100_by_100() {
    let inst = instance(GeneratorConfig::CombinatorialAuction { n_items: 100, n_bids: 100 }, 0, 0);
    let s = inst.stats();
    assert_eq!(s.n_binary, 100);
    assert_eq!(s.n_vars, 100);
    assert!(s.n_constraints <= 100);
    assert!(inst.constraints().iter().all(|c| c.rhs == 1.0));
}

#[test]
fn set_cover_seed_zero_stats() {
    let inst = instance(preset(Family::SetCover, Tier::Desk), 0, 0);
    let s = inst.stats();
    assert_eq!((s.n_binary, s.n_constraints), (250, 50));
    for c in inst.constraints() {
        assert!(c.terms.len() >= 2);
    }
    for v in inst.variables() {
        assert!(v.objective >= 1.0 && v.objective <= 100.0 && v.objective.fract() == 0.0);
    }
}

#[test]
fn facility_location_stats() {
    let cfg = GeneratorConfig::CapacitatedFacilityLocation { n_customers: 12, n_facilities: 5, ratio: 5.0 };
    let s = instance(cfg, 2, 0).stats();
    assert_eq!(s.n_binary, 5);
    assert_eq!(s.n_continuous, 60);
    assert_eq!(s.n_vars, s.n_binary + s.n_integer + s.n_continuous);
}

#[test]
fn independent_set_rows_match_graph_edges() {
    let cfg = GeneratorConfig::MaximumIndependentSet { n_nodes: 20, affinity: 4 };
    let gen = InstanceGenerator::new(cfg, 0).unwrap();
    let inst = gen.generate(0);
    let edges = gen.graph(0).unwrap();
    assert_eq!(inst.constraints().len(), edges.len());
    for (c, &(u, v)) in inst.constraints().iter().zip(&edges) {
        assert_eq!(c.terms, vec![(u, 1.0), (v, 1.0)]);
    }
}

/// Closed-form witnesses: zero for packing families, all ones for set
/// cover, and every facility open with customers split by capacity share.
fn witness(inst: &MipInstance, family: Family) -> Vec<f64> {
    let n = inst.variables().len();
    match family {
        Family::CombinatorialAuction | Family::MaximumIndependentSet => vec![0.0; n],
        Family::SetCover => vec![1.0; n],
        Family::CapacitatedFacilityLocation => {
            let total = inst.constraints().iter().find(|c| c.name == "total_capacity").unwrap();
            let cap_sum: f64 = total.terms.iter().map(|t| t.1).sum();
            let mut x = vec![0.0; n];
            for &(j, cap) in &total.terms {
                x[j] = 1.0;
                let share = cap / cap_sum;
                for (k, v) in inst.variables().iter().enumerate() {
                    if v.kind == VarKind::Continuous && v.name.ends_with(&format!("_{j}")) {
                        x[k] = share;
                    }
                }
            }
            x
        }
    }
}

#[test]
fn sweep_finds_feasible_points() {
    for family in Family::ALL {
        let cfg = preset(family, Tier::Desk);
        for index in 0..10 {
            let inst = instance(cfg, 100, index);
            let lp = inst.lp_relaxation().unwrap();
            assert!(residual(&lp, &witness(&inst, family)) <= 1e-9, "{family} {index}");
            let mut e = Engine::new(Arc::new(inst), EngineParams::default(), 0).unwrap();
            assert_eq!(e.autosolve().unwrap(), SolveStatus::Optimal, "{family} {index}");
            assert!(e.incumbent().is_some());
        }
    }
}

#[test]
fn generated_instances_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for family in Family::ALL {
        let inst = instance(preset(family, Tier::Desk), 0, 0);
        for ext in ["lp", "mip.json"] {
            let path = dir.path().join(format!("{}.{ext}", family.short_name()));
            write_problem(&inst, &path).unwrap();
            let back = read_problem(&path).unwrap();
            assert!(back.semantically_eq(&inst, 1e-9), "{family} via {ext}");
            if ext == "mip.json" {
                assert_eq!(back.metadata(), inst.metadata());
            }
        }
    }
}

#[test]
fn parameter_domains_are_enforced() {
    let bad = [
        GeneratorConfig::CombinatorialAuction { n_items: 0, n_bids: 3 },
        GeneratorConfig::SetCover { n_rows: 5, n_cols: 1, density: 0.5 },
        GeneratorConfig::CapacitatedFacilityLocation { n_customers: 3, n_facilities: 2, ratio: 0.5 },
        GeneratorConfig::MaximumIndependentSet { n_nodes: 4, affinity: 4 },
    ];
    for cfg in bad {
        assert!(InstanceGenerator::new(cfg, 0).is_err(), "{cfg:?}");
    }
}
