//! Gym-style environments: a task combined with an observation function and
//! a reward function.
//!
//! ```
//! use branchgym::env::{Action, Environment, Task};
//! use branchgym::generators::{GeneratorConfig, InstanceGenerator};
//! use branchgym::observations::NodeBipartite;
//! use branchgym::rewards::Reward;
//!
//! let config = GeneratorConfig::CombinatorialAuction { n_items: 20, n_bids: 20 };
//! let mut instances = InstanceGenerator::new(config, 0).unwrap();
//! let mut env = Environment::new(Task::Branching, NodeBipartite, -Reward::nnodes(), Default::default()).unwrap();
//! let (mut obs, mut action_set, _reward, mut done) = env.reset(instances.next().unwrap()).unwrap();
//! while !done {
//!     let j = action_set.candidates()[0];
//!     let (o, a, _r, d, _info) = env.step(Action::Branch(j)).unwrap();
//!     (obs, action_set, done) = (o, a, d);
//! }
//! assert!(obs.is_none());
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{Engine, EngineError, EngineParams, ParamMap, ParamSpace, SolveStatus};
use crate::model::MipInstance;
use crate::observations::{ObservationError, ObservationFunction};
use crate::rewards::{RewardError, RewardFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// One decision per fractional node: which variable to branch on.
    Branching,
    /// One decision per episode: the parameter map, then a full solve.
    Configuring,
    /// No decisions: reset solves the instance with default settings.
    DefaultSolve,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "branching" => Ok(Task::Branching),
            "configuring" => Ok(Task::Configuring),
            "default" | "default_solve" => Ok(Task::DefaultSolve),
            _ => Err(format!("unknown environment `{s}` (expected branching, configuring or default)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Branch(usize),
    Configure(ParamMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ActionSet {
    Candidates(Vec<usize>),
    Parameters(ParamSpace),
    Empty,
}

impl ActionSet {
    /// Candidate indices, empty for other kinds.
    pub fn candidates(&self) -> &[usize] {
        match self {
            ActionSet::Candidates(c) => c,
            _ => &[],
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ActionSet::Candidates(c) => c.is_empty(),
            ActionSet::Parameters(p) => p.is_empty(),
            ActionSet::Empty => true,
        }
    }
}

/// Solver statistics attached to every step. Bounds are in the instance's
/// sense; `None` when infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Info {
    pub nodes_processed: u64,
    pub nodes_created: u64,
    pub lp_iterations_total: u64,
    pub wall_time: f64,
    pub primal_bound: Option<f64>,
    pub dual_bound: Option<f64>,
    pub status: SolveStatus,
}

impl Info {
    pub fn from_engine(engine: &Engine) -> Self {
        let c = engine.counters();
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            nodes_processed: c.nodes_processed,
            nodes_created: c.nodes_created,
            lp_iterations_total: c.lp_iterations_total,
            wall_time: engine.wall_time(),
            primal_bound: finite(engine.primal_bound()),
            dual_bound: finite(engine.dual_bound()),
            status: engine.status(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("environment configuration error: {0}")]
    Config(String),
    #[error("environment protocol error: {0}")]
    Protocol(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error(transparent)]
    Engine(EngineError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Observation(#[from] ObservationError),
}

impl From<EngineError> for EnvError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidAction { .. } | EngineError::Param(_) => EnvError::InvalidAction(e.to_string()),
            EngineError::Protocol(m) => EnvError::Protocol(m),
            other => EnvError::Engine(other),
        }
    }
}

pub type ResetOutput<T> = (Option<T>, ActionSet, f64, bool);
pub type StepOutput<T> = (Option<T>, ActionSet, f64, bool, Info);

pub struct Environment<O, R> {
    task: Task,
    observation: O,
    reward: R,
    params: EngineParams,
    seed: u64,
    engine: Option<Engine>,
    done: bool,
}

impl<O: ObservationFunction, R: RewardFunction> Environment<O, R> {
    pub fn new(task: Task, observation: O, reward: R, params: EngineParams) -> Result<Self, EnvError> {
        if task != Task::Branching && observation.needs_node() {
            return Err(EnvError::Config(format!(
                "{task:?} has no branching node for this observation function"
            )));
        }
        Ok(Self { task, observation, reward, params, seed: 0, engine: None, done: false })
    }

    /// Seed for the next episodes; 0 unless set.
    pub fn seed(&mut self, value: u64) {
        self.seed = value;
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn engine(&self) -> Option<&Engine> {
        self.engine.as_ref()
    }

    pub fn info(&self) -> Option<Info> {
        self.engine.as_ref().map(Info::from_engine)
    }

    pub fn reset(&mut self, instance: impl Into<Arc<MipInstance>>) -> Result<ResetOutput<O::Output>, EnvError> {
        self.engine = None;
        self.done = false;
        let mut engine = Engine::new(instance.into(), self.params.clone(), self.seed)?;
        self.observation.before_reset(&engine);
        self.reward.before_reset(&engine);
        match self.task {
            Task::Branching => {
                engine.start()?;
            }
            Task::DefaultSolve => {
                engine.autosolve()?;
            }
            Task::Configuring => {}
        }
        let (obs, action_set, reward, done) = self.event(&engine)?;
        self.engine = Some(engine);
        self.done = done;
        Ok((obs, action_set, reward, done))
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutput<O::Output>, EnvError> {
        let mut engine = self
            .engine
            .take()
            .ok_or_else(|| EnvError::Protocol("reset must precede step".into()))?;
        let outcome = self.advance(&mut engine, action);
        let result = outcome.and_then(|_| self.event(&engine));
        let info = Info::from_engine(&engine);
        self.engine = Some(engine);
        let (obs, action_set, reward, done) = result?;
        self.done = done;
        Ok((obs, action_set, reward, done, info))
    }

    fn advance(&self, engine: &mut Engine, action: Action) -> Result<(), EnvError> {
        if self.done {
            return Err(EnvError::Protocol("step called after the episode ended".into()));
        }
        match (self.task, action) {
            (Task::Branching, Action::Branch(j)) => {
                engine.branch(j)?;
            }
            (Task::Configuring, Action::Configure(map)) => {
                engine.set_params(&map)?;
                engine.autosolve()?;
            }
            (task, action) => {
                return Err(EnvError::InvalidAction(format!("{action:?} does not apply to {task:?}")));
            }
        }
        Ok(())
    }

    fn event(&mut self, engine: &Engine) -> Result<ResetOutput<O::Output>, EnvError> {
        let done = engine.status().is_terminal();
        let reward = self.reward.extract(engine, done)?;
        if done {
            return Ok((None, ActionSet::Empty, reward, true));
        }
        let obs = self.observation.extract(engine)?;
        let action_set = match self.task {
            Task::Branching => ActionSet::Candidates(engine.candidate_indices()),
            Task::Configuring => ActionSet::Parameters(ParamSpace::engine()),
            Task::DefaultSolve => ActionSet::Empty,
        };
        Ok((Some(obs), action_set, reward, false))
    }
}
