//! Observation functions over the node awaiting a branching decision.
//!
//! All objective data is taken from the minimization-form LP, so for a
//! maximization instance the objective coefficients appear negated. Norms
//! are replaced by 1 when they are zero.
//!
//! Node bipartite variable columns, in order:
//!
//! | col | feature |
//! |-----|---------|
//! | 0 | `c_j / ‖c‖₂` |
//! | 1-3 | kind one-hot: binary, integer, continuous |
//! | 4, 5 | finite local lower / upper bound |
//! | 6 | LP value |
//! | 7 | fractionality (0 for continuous variables) |
//! | 8-10 | basis one-hot: basic, at lower, at upper |
//! | 11 | reduced cost `/ ‖c‖₂` |
//! | 12 | incumbent exists |
//! | 13 | incumbent value (0 without incumbent) |
//!
//! Constraint columns (`>=` rows are negated into `<=` rows first):
//! `rhs / ‖a_i‖₂`, `dual / ‖a_i‖₂`, tight (slack ≤ 1e-6), equality.
//!
//! Candidate columns: see [`CANDIDATE_COLUMNS`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{Engine, FocusNode, SolveStatus};
use crate::lp::{BasisStatus, RowSense};
use crate::model::VarKind;

const TIGHT_TOL: f64 = 1e-6;

pub const VARIABLE_COLUMNS: [&str; 14] = [
    "objective",
    "is_binary",
    "is_integer",
    "is_continuous",
    "has_lower_bound",
    "has_upper_bound",
    "lp_value",
    "fractionality",
    "is_basic",
    "at_lower",
    "at_upper",
    "reduced_cost",
    "has_incumbent",
    "incumbent_value",
];

pub const CONSTRAINT_COLUMNS: [&str; 4] = ["rhs", "dual", "is_tight", "is_equality"];

pub const CANDIDATE_COLUMNS: [&str; 18] = [
    "objective",
    "objective_positive",
    "objective_negative",
    "objective_share",
    "column_degree",
    "coef_mean",
    "coef_min",
    "coef_max",
    "lp_value",
    "fractionality",
    "floor_distance",
    "ceil_distance",
    "pseudocost_up",
    "pseudocost_down",
    "pseudocost_product",
    "times_branched",
    "depth",
    "is_root",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservationError {
    #[error("observation protocol error: {0}")]
    Protocol(String),
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, c)).collect()
    }

    /// Little-endian bytes of `data`, row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeBipartiteObs {
    pub variable_features: FeatureMatrix,
    pub constraint_features: FeatureMatrix,
    pub edges: Vec<Edge>,
}

impl NodeBipartiteObs {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.variable_features.to_bytes();
        out.extend(self.constraint_features.to_bytes());
        for e in &self.edges {
            out.extend((e.row as u64).to_le_bytes());
            out.extend((e.col as u64).to_le_bytes());
            out.extend(e.value.to_le_bytes());
        }
        out
    }
}

/// Hooks called by an environment around every event.
pub trait ObservationFunction {
    type Output: Clone;

    /// Whether the observation reads the focus node; such functions cannot
    /// serve tasks without branching decisions.
    fn needs_node(&self) -> bool;

    fn before_reset(&mut self, _engine: &Engine) {}

    fn extract(&mut self, engine: &Engine) -> Result<Self::Output, ObservationError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoObservation;

impl ObservationFunction for NoObservation {
    type Output = ();

    fn needs_node(&self) -> bool {
        false
    }

    fn extract(&mut self, _engine: &Engine) -> Result<(), ObservationError> {
        Ok(())
    }
}

fn awaiting(engine: &Engine) -> Result<&FocusNode, ObservationError> {
    match (engine.status(), engine.focus()) {
        (SolveStatus::AwaitingBranch, Some(f)) => Ok(f),
        (s, _) => Err(ObservationError::Protocol(format!(
            "observation requested in status {}",
            s.name()
        ))),
    }
}

fn guarded(norm: f64) -> f64 {
    if norm > 0.0 {
        norm
    } else {
        1.0
    }
}

fn fractionality(x: f64) -> f64 {
    (x - x.floor()).min(x.ceil() - x)
}

/// Row norms and the sign that turns each row into `<=` or `=` form.
fn row_scaling(engine: &Engine) -> Vec<(f64, f64)> {
    engine
        .lp()
        .rows()
        .iter()
        .map(|r| {
            let norm = r.terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt();
            let sign = if r.sense == RowSense::Ge { -1.0 } else { 1.0 };
            (guarded(norm), sign)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeBipartite;

impl ObservationFunction for NodeBipartite {
    type Output = NodeBipartiteObs;

    fn needs_node(&self) -> bool {
        true
    }

    fn extract(&mut self, engine: &Engine) -> Result<NodeBipartiteObs, ObservationError> {
        let focus = awaiting(engine)?;
        let lp = engine.lp();
        let c = lp.objective();
        let c_norm = guarded(c.iter().map(|v| v * v).sum::<f64>().sqrt());
        let incumbent = engine.incumbent();
        let sol = &focus.lp;

        let mut vars = FeatureMatrix::zeros(lp.n_vars(), VARIABLE_COLUMNS.len());
        for (j, v) in engine.instance().variables().iter().enumerate() {
            let x = sol.primal[j];
            let kind = match v.kind {
                VarKind::Binary => 1,
                VarKind::Integer => 2,
                VarKind::Continuous => 3,
            };
            vars.set(j, 0, c[j] / c_norm);
            vars.set(j, kind, 1.0);
            vars.set(j, 4, f64::from(u8::from(focus.lower[j].is_finite())));
            vars.set(j, 5, f64::from(u8::from(focus.upper[j].is_finite())));
            vars.set(j, 6, x);
            if v.kind.is_integral() {
                vars.set(j, 7, fractionality(x));
            }
            match sol.basis.columns[j] {
                BasisStatus::Basic => vars.set(j, 8, 1.0),
                BasisStatus::AtLower => vars.set(j, 9, 1.0),
                BasisStatus::AtUpper => vars.set(j, 10, 1.0),
                BasisStatus::Free => {}
            }
            vars.set(j, 11, sol.reduced_costs[j] / c_norm);
            if let Some(inc) = incumbent {
                vars.set(j, 12, 1.0);
                vars.set(j, 13, inc.values[j]);
            }
        }

        let scaling = row_scaling(engine);
        let mut cons = FeatureMatrix::zeros(lp.n_rows(), CONSTRAINT_COLUMNS.len());
        let mut edges = Vec::with_capacity(lp.n_nonzeros());
        for (i, row) in lp.rows().iter().enumerate() {
            let (norm, sign) = scaling[i];
            cons.set(i, 0, sign * row.rhs / norm);
            cons.set(i, 1, sign * sol.duals[i] / norm);
            let tight = (sol.row_activity[i] - row.rhs).abs() <= TIGHT_TOL;
            cons.set(i, 2, f64::from(u8::from(tight)));
            cons.set(i, 3, f64::from(u8::from(row.sense == RowSense::Eq)));
            for &(j, a) in &row.terms {
                edges.push(Edge { row: i, col: j, value: sign * a / norm });
            }
        }
        Ok(NodeBipartiteObs { variable_features: vars, constraint_features: cons, edges })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CandidateFeatures;

impl ObservationFunction for CandidateFeatures {
    type Output = FeatureMatrix;

    fn needs_node(&self) -> bool {
        true
    }

    fn extract(&mut self, engine: &Engine) -> Result<FeatureMatrix, ObservationError> {
        let focus = awaiting(engine)?;
        let lp = engine.lp();
        let c = lp.objective();
        let c_l1 = guarded(c.iter().map(|v| v.abs()).sum());
        let scaling = row_scaling(engine);
        let pc = engine.pseudocosts();
        let depth = focus.node.depth as f64;

        let mut m = FeatureMatrix::zeros(focus.candidates.len(), CANDIDATE_COLUMNS.len());
        for (k, cand) in focus.candidates.iter().enumerate() {
            let j = cand.variable;
            let x = cand.value;
            let col = lp.column(j);
            let coefs: Vec<f64> = col.iter().map(|&(i, a)| a.abs() / scaling[i].0).collect();
            let (mean, min, max) = if coefs.is_empty() {
                (0.0, 0.0, 0.0)
            } else {
                (
                    coefs.iter().sum::<f64>() / coefs.len() as f64,
                    coefs.iter().copied().fold(f64::INFINITY, f64::min),
                    coefs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let down_dist = x - x.floor();
            let up_dist = x.ceil() - x;
            let pc_up = pc.up(j).unwrap_or(0.0);
            let pc_down = pc.down(j).unwrap_or(0.0);
            let row = [
                c[j],
                c[j].max(0.0),
                c[j].min(0.0),
                c[j].abs() / c_l1,
                col.len() as f64,
                mean,
                min,
                max,
                x,
                cand.fractionality,
                down_dist,
                up_dist,
                pc_up,
                pc_down,
                (pc_down * down_dist) * (pc_up * up_dist),
                engine.times_branched(j) as f64,
                depth,
                f64::from(u8::from(focus.node.depth == 0)),
            ];
            for (col_idx, v) in row.into_iter().enumerate() {
                m.set(k, col_idx, v);
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    None,
    NodeBipartite,
    CandidateFeatures,
}

impl std::str::FromStr for ObservationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(ObservationKind::None),
            "bipartite" | "node_bipartite" => Ok(ObservationKind::NodeBipartite),
            "candidate" | "candidate_features" => Ok(ObservationKind::CandidateFeatures),
            _ => Err(format!("unknown observation `{s}` (expected none, bipartite or candidate)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    None,
    NodeBipartite(NodeBipartiteObs),
    CandidateFeatures(FeatureMatrix),
}

impl Observation {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Observation::None => Vec::new(),
            Observation::NodeBipartite(o) => o.to_bytes(),
            Observation::CandidateFeatures(m) => m.to_bytes(),
        }
    }
}

/// Observation chosen at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnyObservation(pub ObservationKind);

impl ObservationFunction for AnyObservation {
    type Output = Observation;

    fn needs_node(&self) -> bool {
        self.0 != ObservationKind::None
    }

    fn extract(&mut self, engine: &Engine) -> Result<Observation, ObservationError> {
        Ok(match self.0 {
            ObservationKind::None => Observation::None,
            ObservationKind::NodeBipartite => Observation::NodeBipartite(NodeBipartite.extract(engine)?),
            ObservationKind::CandidateFeatures => {
                Observation::CandidateFeatures(CandidateFeatures.extract(engine)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{EngineParams, ParamMap, ParamValue};
    use crate::model::{ConstraintSense, InstanceBuilder, MipInstance, ObjectiveSense};
    use std::sync::Arc;

    fn started(inst: MipInstance) -> Engine {
        let mut e = Engine::new(Arc::new(inst), EngineParams::default(), 0).unwrap();
        let map: ParamMap = [("rounding_heuristic".to_string(), ParamValue::Bool(false))].into();
        e.set_params(&map).unwrap();
        e.start().unwrap();
        e
    }

    /// Two binaries with `x + y <= 1.5`, `x - y >= -0.5`.
    fn half_instance(cx: f64, cy: f64) -> MipInstance {
        let mut b = InstanceBuilder::new("half", ObjectiveSense::Maximize);
        let x = b.add_variable("x", 0.0, 1.0, VarKind::Binary, cx).unwrap();
        let y = b.add_variable("y", 0.0, 1.0, VarKind::Binary, cy).unwrap();
        b.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], ConstraintSense::Le, 1.5).unwrap();
        b.add_constraint("diff", vec![(x, 1.0), (y, -1.0)], ConstraintSense::Ge, -0.5).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn shapes_and_edges() {
        let e = started(half_instance(1.0, 2.0));
        let obs = NodeBipartite.extract(&e).unwrap();
        assert_eq!((obs.variable_features.n_rows, obs.variable_features.n_cols), (2, 14));
        assert_eq!((obs.constraint_features.n_rows, obs.constraint_features.n_cols), (2, 4));
        assert_eq!(obs.edges.len(), 4);
        assert!(obs.variable_features.all_finite());
        // The >= row is negated before normalization.
        let s = 2f64.sqrt();
        assert!((obs.constraint_features.get(1, 0) - 0.5 / s).abs() < 1e-12);
        assert!((obs.edges[2].value + 1.0 / s).abs() < 1e-12);
    }

    #[test]
    fn half_value_features() {
        // LP optimum: y = 1, x = 0.5.
        let e = started(half_instance(1.0, 2.0));
        let cands = e.candidate_indices();
        assert_eq!(cands, vec![0]);
        let obs = NodeBipartite.extract(&e).unwrap();
        assert!((obs.variable_features.get(0, 6) - 0.5).abs() < 1e-9);
        assert!((obs.variable_features.get(0, 7) - 0.5).abs() < 1e-9);
        let cf = CandidateFeatures.extract(&e).unwrap();
        assert_eq!(cf.n_rows, 1);
        assert!((cf.get(0, 10) - 0.5).abs() < 1e-9);
        assert!((cf.get(0, 11) - 0.5).abs() < 1e-9);
        assert_eq!(cf.get(0, 15), 0.0);
        assert_eq!(cf.get(0, 17), 1.0);
        assert_eq!((cf.get(0, 12), cf.get(0, 13), cf.get(0, 14)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_objective_gives_zero_column() {
        let mut b = InstanceBuilder::new("zero", ObjectiveSense::Minimize);
        let x = b.add_variable("x", 0.0, 1.0, VarKind::Binary, 0.0).unwrap();
        let y = b.add_variable("y", 0.0, 1.0, VarKind::Binary, 0.0).unwrap();
        b.add_constraint("c", vec![(x, 2.0), (y, 2.0)], ConstraintSense::Eq, 1.0).unwrap();
        let e = started(b.build().unwrap());
        assert_eq!(e.status(), SolveStatus::AwaitingBranch);
        let obs = NodeBipartite.extract(&e).unwrap();
        assert!(obs.variable_features.column(0).iter().all(|v| *v == 0.0));
        assert!(obs.variable_features.all_finite());
        let cf = CandidateFeatures.extract(&e).unwrap();
        assert!(cf.column(3).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrong_status_is_a_protocol_error() {
        let e = Engine::new(Arc::new(half_instance(1.0, 2.0)), EngineParams::default(), 0).unwrap();
        assert!(NodeBipartite.extract(&e).is_err());
        assert!(CandidateFeatures.extract(&e).is_err());
    }

    #[test]
    fn bytes_are_row_major() {
        let mut m = FeatureMatrix::zeros(2, 2);
        m.set(0, 1, 1.0);
        let b = m.to_bytes();
        assert_eq!(b.len(), 32);
        assert_eq!(&b[8..16], &1.0f64.to_le_bytes());
    }
}
