//! Baseline branching policies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{most_infeasible, Engine, EngineError, SCORE_EPS};
use crate::lp::LpStatus;

/// Iteration cap for each strong-branching child LP.
pub const STRONG_BRANCHING_ITERATIONS: u64 = 100;
/// Gain assigned to an LP-infeasible child.
pub const INFEASIBLE_GAIN: f64 = 1e8;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy called with an empty action set")]
    EmptyActionSet,
    #[error("action set entry {0} is not a branching candidate")]
    UnknownCandidate(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    MostInfeasible,
    Pseudocost,
    StrongBranching,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Random,
        PolicyKind::MostInfeasible,
        PolicyKind::Pseudocost,
        PolicyKind::StrongBranching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::MostInfeasible => "most_infeasible",
            PolicyKind::Pseudocost => "pseudocost",
            PolicyKind::StrongBranching => "strong_branching",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    rng: ChaCha8Rng,
}

impl Policy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self { kind, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Picks a member of `action_set` for the engine's focus node.
    pub fn choose(&mut self, engine: &Engine, action_set: &[usize]) -> Result<usize, PolicyError> {
        if action_set.is_empty() {
            return Err(PolicyError::EmptyActionSet);
        }
        let candidates = engine.candidates()?;
        let lookup = |j: usize| {
            candidates
                .iter()
                .find(|c| c.variable == j)
                .ok_or(PolicyError::UnknownCandidate(j))
        };
        match self.kind {
            PolicyKind::Random => Ok(action_set[self.rng.gen_range(0..action_set.len())]),
            PolicyKind::MostInfeasible => {
                let fr = action_set
                    .iter()
                    .map(|&j| Ok((j, lookup(j)?.fractionality)))
                    .collect::<Result<Vec<_>, PolicyError>>()?;
                Ok(most_infeasible(&fr).expect("non-empty"))
            }
            PolicyKind::Pseudocost => {
                let vals = action_set
                    .iter()
                    .map(|&j| Ok((j, lookup(j)?.value)))
                    .collect::<Result<Vec<_>, PolicyError>>()?;
                if let Some(j) = engine.pseudocosts().select(&vals) {
                    return Ok(j);
                }
                let fr = action_set
                    .iter()
                    .map(|&j| Ok((j, lookup(j)?.fractionality)))
                    .collect::<Result<Vec<_>, PolicyError>>()?;
                Ok(most_infeasible(&fr).expect("non-empty"))
            }
            PolicyKind::StrongBranching => {
                for &j in action_set {
                    lookup(j)?;
                }
                let scores = strong_branching_scores(engine, action_set, STRONG_BRANCHING_ITERATIONS)?;
                Ok(argmax(action_set, &scores))
            }
        }
    }
}

/// Highest score, first position on ties.
fn argmax(items: &[usize], scores: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..items.len() {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    items[best]
}

/// Objective gain of one child over its parent, with the documented
/// conventions for infeasible and unfinished children.
fn child_gain(status: LpStatus, child_objective: f64, parent_objective: f64) -> f64 {
    match status {
        LpStatus::Optimal => (child_objective - parent_objective).max(0.0),
        LpStatus::Infeasible => INFEASIBLE_GAIN,
        LpStatus::IterationLimit | LpStatus::Unbounded => 0.0,
    }
}

/// Product scores `max(Δ⁻, ε)·max(Δ⁺, ε)` for each variable in `vars`.
pub fn strong_branching_scores(engine: &Engine, vars: &[usize], iteration_cap: u64) -> Result<Vec<f64>, EngineError> {
    let focus = engine
        .focus()
        .ok_or_else(|| EngineError::Protocol("strong branching needs a focus node".into()))?;
    let parent = focus.lp.objective;
    Ok(engine
        .child_lp_pairs(vars, iteration_cap)?
        .iter()
        .map(|(down, up)| {
            let d = child_gain(down.status, down.objective, parent);
            let u = child_gain(up.status, up.objective, parent);
            d.max(SCORE_EPS) * u.max(SCORE_EPS)
        })
        .collect())
}
