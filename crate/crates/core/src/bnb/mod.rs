//! Branch-and-bound over LP relaxations with reverse control.
//!
//! The engine is an explicit state machine: [`Engine::start`] solves the
//! root and runs until the first fractional LP, [`Engine::branch`] splits
//! the current node on a caller-chosen variable and runs to the next
//! fractional LP, and [`Engine::autosolve`] makes the remaining decisions
//! with the internal rule. Internally all objectives are in minimization
//! form; public bounds and events use the instance's own sense.

mod events;
mod params;
mod pseudocost;

pub use events::{Counters, EngineEvent, IncumbentSource, PruneReason, SolveStatus};
pub use params::{
    parse_assignment, BranchingRule, EngineParams, NodeSelection, ParamDescriptor, ParamDomain,
    ParamError, ParamMap, ParamSpace, ParamValue,
};
pub use pseudocost::{most_infeasible, Pseudocosts, SCORE_EPS};

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lp::{
    feasibility_residual_with_bounds, Basis, FactoredBasis, LinearProgram, LpError, LpSolution, LpStatus,
    SimplexSolver,
};
use crate::model::MipInstance;

/// Absolute slack for pruning by bound.
pub const PRUNE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("invalid action: variable {variable} is not a branching candidate")]
    InvalidAction { variable: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundChange {
    pub variable: usize,
    pub upper: bool,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BranchOrigin {
    variable: usize,
    up: bool,
    parent_objective: f64,
    distance: f64,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub id: u64,
    pub parent: Option<u64>,
    pub depth: u32,
    /// Every bound change on the path from the root.
    pub bound_changes: Vec<BoundChange>,
    /// Minimization-form lower bound inherited from the parent.
    pub dual_bound: f64,
    pub warm: Option<Arc<Basis>>,
    origin: Option<BranchOrigin>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub variable: usize,
    pub value: f64,
    pub fractionality: f64,
}

/// The node awaiting a branching decision.
#[derive(Debug, Clone)]
pub struct FocusNode {
    pub node: SearchNode,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lp: LpSolution,
    /// Minimization-form node bound.
    pub bound: f64,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub values: Vec<f64>,
    /// In the instance's own sense.
    pub objective: f64,
    pub node: u64,
}

/// Bounds at one moment, minimization form, for integral metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub time: f64,
    pub primal: f64,
    pub dual: f64,
}

struct Open {
    key: f64,
    node: SearchNode,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Max-heap: the smallest (key, id) must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.node.id.cmp(&self.node.id))
    }
}

pub struct Engine {
    instance: Arc<MipInstance>,
    lp: LinearProgram,
    integral: Vec<bool>,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    box_bounds: (f64, f64),
    sign: f64,
    params: EngineParams,
    rng: ChaCha8Rng,
    status: SolveStatus,
    started: bool,
    frontier: BinaryHeap<Open>,
    next_id: u64,
    focus: Option<FocusNode>,
    incumbent: Option<Incumbent>,
    pseudocosts: Pseudocosts,
    branch_counts: Vec<u32>,
    counters: Counters,
    events: Vec<EngineEvent>,
    epoch: u64,
    dual_floor: f64,
    history: Vec<BoundSample>,
    clock: Option<Instant>,
    frozen_time: Option<f64>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("instance", &self.instance.name())
            .field("status", &self.status)
            .field("counters", &self.counters)
            .finish_non_exhaustive()
    }
}

fn user_value(sign: f64, v: f64) -> Option<f64> {
    v.is_finite().then_some(sign * v)
}

impl Engine {
    pub fn new(instance: Arc<MipInstance>, params: EngineParams, seed: u64) -> Result<Self, EngineError> {
        let lp = instance.lp_relaxation()?;
        let integral: Vec<bool> = instance.variables().iter().map(|v| v.kind.is_integral()).collect();
        let mut root_lower = lp.col_lower().to_vec();
        let mut root_upper = lp.col_upper().to_vec();
        for j in 0..lp.n_vars() {
            if integral[j] {
                root_lower[j] = (root_lower[j] - 1e-9).ceil();
                root_upper[j] = (root_upper[j] + 1e-9).floor();
            }
        }
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (j, &c) in lp.objective().iter().enumerate() {
            if c != 0.0 {
                let a = c * root_lower[j];
                let b = c * root_upper[j];
                lo += a.min(b);
                hi += a.max(b);
            }
        }
        let n = lp.n_vars();
        Ok(Self {
            sign: instance.sense().sign(),
            instance,
            lp,
            integral,
            root_lower,
            root_upper,
            box_bounds: (lo, hi),
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            status: SolveStatus::Running,
            started: false,
            frontier: BinaryHeap::new(),
            next_id: 0,
            focus: None,
            incumbent: None,
            pseudocosts: Pseudocosts::new(n),
            branch_counts: vec![0; n],
            counters: Counters::default(),
            events: Vec::new(),
            epoch: 0,
            dual_floor: f64::NEG_INFINITY,
            history: Vec::new(),
            clock: None,
            frozen_time: None,
        })
    }

    pub fn set_params(&mut self, map: &ParamMap) -> Result<(), EngineError> {
        if self.started {
            return Err(ParamError::AlreadyStarted.into());
        }
        self.params.apply(map)?;
        Ok(())
    }

    /// Solves the root and runs until a branching decision or a terminal
    /// status.
    pub fn start(&mut self) -> Result<SolveStatus, EngineError> {
        if self.started {
            return Err(EngineError::Protocol("engine already started".into()));
        }
        self.epoch += 1;
        self.begin();
        self.advance()?;
        Ok(self.status)
    }

    /// Branches the focus node on `variable` and runs to the next decision.
    pub fn branch(&mut self, variable: usize) -> Result<SolveStatus, EngineError> {
        if self.status != SolveStatus::AwaitingBranch {
            return Err(EngineError::Protocol(format!(
                "branch called in status {}",
                self.status.name()
            )));
        }
        let focus = self.focus.as_ref().expect("focus exists while awaiting");
        if !focus.candidates.iter().any(|c| c.variable == variable) {
            return Err(EngineError::InvalidAction { variable });
        }
        self.epoch += 1;
        self.split(variable);
        self.advance()?;
        Ok(self.status)
    }

    /// Runs to a terminal status with the internal branching rule. A no-op
    /// on terminal engines.
    pub fn autosolve(&mut self) -> Result<SolveStatus, EngineError> {
        if self.status.is_terminal() {
            return Ok(self.status);
        }
        self.epoch += 1;
        if !self.started {
            self.begin();
            self.advance()?;
        }
        while self.status == SolveStatus::AwaitingBranch {
            let j = self.internal_choice();
            self.split(j);
            self.advance()?;
        }
        Ok(self.status)
    }

    pub fn candidates(&self) -> Result<&[Candidate], EngineError> {
        match (&self.focus, self.status) {
            (Some(f), SolveStatus::AwaitingBranch) => Ok(&f.candidates),
            _ => Err(EngineError::Protocol(format!(
                "candidates requested in status {}",
                self.status.name()
            ))),
        }
    }

    /// Candidate variable indices in ascending order; empty unless awaiting.
    pub fn candidate_indices(&self) -> Vec<usize> {
        self.candidates()
            .map(|c| c.iter().map(|c| c.variable).collect())
            .unwrap_or_default()
    }

    /// Solves one child LP of the focus node without touching any counter.
    pub fn child_lp(&self, variable: usize, up: bool, iteration_cap: u64) -> Result<LpSolution, EngineError> {
        self.child_lp_from(None, variable, up, iteration_cap)
    }

    /// Down and up child LPs for each of `variables`, inverting the focus
    /// basis once for all of them. Counters are not touched.
    pub fn child_lp_pairs(
        &self,
        variables: &[usize],
        iteration_cap: u64,
    ) -> Result<Vec<(LpSolution, LpSolution)>, EngineError> {
        let focus = self
            .focus
            .as_ref()
            .ok_or_else(|| EngineError::Protocol("no focus node".into()))?;
        let factored = SimplexSolver::new(self.params.simplex).factor(&self.lp, &focus.lp.basis);
        variables
            .iter()
            .map(|&j| {
                let down = self.child_lp_from(factored.as_ref(), j, false, iteration_cap)?;
                let up = self.child_lp_from(factored.as_ref(), j, true, iteration_cap)?;
                Ok((down, up))
            })
            .collect()
    }

    fn child_lp_from(
        &self,
        factored: Option<&FactoredBasis>,
        variable: usize,
        up: bool,
        iteration_cap: u64,
    ) -> Result<LpSolution, EngineError> {
        let focus = self
            .focus
            .as_ref()
            .ok_or_else(|| EngineError::Protocol("no focus node".into()))?;
        let x = focus.lp.primal[variable];
        let mut lower = focus.lower.clone();
        let mut upper = focus.upper.clone();
        if up {
            lower[variable] = lower[variable].max(x.ceil());
        } else {
            upper[variable] = upper[variable].min(x.floor());
        }
        let mut options = self.params.simplex;
        options.iteration_limit = iteration_cap;
        let solver = SimplexSolver::new(options);
        Ok(match factored {
            Some(f) => solver.solve_factored(&self.lp, &lower, &upper, f)?,
            None => solver.solve_with_bounds(&self.lp, &lower, &upper, Some(&focus.lp.basis))?,
        })
    }

    pub fn instance(&self) -> &MipInstance {
        &self.instance
    }

    pub fn shared_instance(&self) -> &Arc<MipInstance> {
        &self.instance
    }

    /// Minimization-form LP relaxation.
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn status(&self) -> SolveStatus {
        self.status
    }

    pub fn focus(&self) -> Option<&FocusNode> {
        self.focus.as_ref()
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn events(&self) -> &[EngineEvent] {
        &self.events
    }

    pub fn pseudocosts(&self) -> &Pseudocosts {
        &self.pseudocosts
    }

    pub fn times_branched(&self, variable: usize) -> u32 {
        self.branch_counts[variable]
    }

    /// Increases with every state-advancing call.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn wall_time(&self) -> f64 {
        match (self.frozen_time, self.clock) {
            (Some(t), _) => t,
            (None, Some(c)) => c.elapsed().as_secs_f64(),
            (None, None) => 0.0,
        }
    }

    /// Incumbent objective in the instance's sense; infinite when absent.
    pub fn primal_bound(&self) -> f64 {
        self.sign * self.primal_min()
    }

    /// Best proven bound in the instance's sense.
    pub fn dual_bound(&self) -> f64 {
        self.sign * self.dual_floor
    }

    /// `(primal, dual)` in minimization form.
    pub fn bounds_min(&self) -> (f64, f64) {
        (self.primal_min(), self.dual_floor)
    }

    /// Objective range over the root bound box, minimization form.
    pub fn box_bounds_min(&self) -> (f64, f64) {
        self.box_bounds
    }

    pub fn bound_history(&self) -> &[BoundSample] {
        &self.history
    }

    /// Relative primal-dual gap; infinite without both bounds.
    pub fn gap(&self) -> f64 {
        let (p, d) = self.bounds_min();
        if !p.is_finite() || !d.is_finite() {
            return f64::INFINITY;
        }
        (p - d).max(0.0) / p.abs().max(d.abs()).max(1e-9)
    }

    fn primal_min(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::INFINITY, |i| self.sign * i.objective)
    }

    fn begin(&mut self) {
        self.started = true;
        self.clock = Some(Instant::now());
        let root = SearchNode {
            id: self.take_id(),
            parent: None,
            depth: 0,
            bound_changes: Vec::new(),
            dual_bound: f64::NEG_INFINITY,
            warm: None,
            origin: None,
        };
        self.counters.nodes_created += 1;
        self.push(root);
        self.record();
    }

    fn take_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn push(&mut self, node: SearchNode) {
        let key = match self.params.node_selection {
            NodeSelection::BestBound => node.dual_bound,
            NodeSelection::Dfs => -(node.depth as f64),
        };
        self.frontier.push(Open { key, node });
    }

    fn cut_off(&self, bound: f64) -> bool {
        bound >= self.primal_min() - PRUNE_TOL
    }

    fn limit_hit(&self) -> bool {
        if let Some(n) = self.params.node_limit {
            if self.counters.nodes_processed >= n {
                return true;
            }
        }
        if let Some(n) = self.params.lp_iteration_limit {
            if self.counters.lp_iterations_total >= n {
                return true;
            }
        }
        if let Some(t) = self.params.time_limit {
            if self.wall_time() >= t {
                return true;
            }
        }
        false
    }

    /// Processes nodes until one needs a branching decision, the tree is
    /// exhausted, or a limit is hit.
    fn advance(&mut self) -> Result<(), EngineError> {
        self.status = SolveStatus::Running;
        loop {
            if self.frontier.is_empty() {
                let status = if self.incumbent.is_some() {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Infeasible
                };
                self.finish(status);
                return Ok(());
            }
            if self.limit_hit() {
                self.finish(SolveStatus::LimitReached);
                return Ok(());
            }
            let node = self.frontier.pop().expect("non-empty").node;
            if self.cut_off(node.dual_bound) {
                self.counters.pruned_before_lp += 1;
                self.events.push(EngineEvent::NodePruned {
                    node: node.id,
                    reason: PruneReason::Bound,
                    before_lp: true,
                });
                self.record();
                continue;
            }
            if self.process(node)? {
                return Ok(());
            }
        }
    }

    /// Solves one node. Returns `true` when control must return to the
    /// caller (a decision is pending or the solve ended).
    fn process(&mut self, node: SearchNode) -> Result<bool, EngineError> {
        let mut lower = self.root_lower.clone();
        let mut upper = self.root_upper.clone();
        for c in &node.bound_changes {
            if c.upper {
                upper[c.variable] = upper[c.variable].min(c.value);
            } else {
                lower[c.variable] = lower[c.variable].max(c.value);
            }
        }
        let mut options = self.params.simplex;
        if let Some(cap) = self.params.lp_iteration_limit {
            options.iteration_limit = options
                .iteration_limit
                .min(cap.saturating_sub(self.counters.lp_iterations_total).max(1));
        }
        let lp = SimplexSolver::new(options).solve_with_bounds(
            &self.lp,
            &lower,
            &upper,
            node.warm.as_deref(),
        )?;
        self.counters.nodes_processed += 1;
        self.counters.lp_iterations_total += lp.iterations;
        self.events.push(EngineEvent::NodeSolved {
            node: node.id,
            depth: node.depth,
            lp_status: lp.status,
            objective: (lp.status == LpStatus::Optimal).then_some(self.sign * lp.objective),
            lp_iterations: lp.iterations,
            counters: self.counters,
        });

        match lp.status {
            LpStatus::Infeasible => {
                self.events.push(EngineEvent::NodePruned {
                    node: node.id,
                    reason: PruneReason::Infeasible,
                    before_lp: false,
                });
                self.record();
                return Ok(false);
            }
            LpStatus::Unbounded => {
                self.finish(SolveStatus::Unbounded);
                return Ok(true);
            }
            LpStatus::IterationLimit => {
                // Keep the node open so the dual bound stays valid.
                self.push(node);
                self.finish(SolveStatus::LimitReached);
                return Ok(true);
            }
            LpStatus::Optimal => {}
        }

        if let Some(o) = node.origin {
            let gain = (lp.objective - o.parent_objective).max(0.0);
            self.pseudocosts.record(o.variable, o.up, gain / o.distance);
        }
        let bound = node.dual_bound.max(lp.objective);
        if self.cut_off(bound) {
            self.prune(node.id, PruneReason::Bound);
            return Ok(false);
        }

        let tol = self.params.int_tol;
        let candidates: Vec<Candidate> = (0..self.lp.n_vars())
            .filter(|&j| self.integral[j])
            .filter_map(|j| {
                let x = lp.primal[j];
                let f = (x - x.floor()).min(x.ceil() - x);
                (f > tol).then_some(Candidate { variable: j, value: x, fractionality: f })
            })
            .collect();

        if candidates.is_empty() {
            let values: Vec<f64> = lp
                .primal
                .iter()
                .zip(&self.integral)
                .map(|(&x, &int)| if int { x.round() } else { x })
                .collect();
            self.offer(values, node.id, IncumbentSource::Lp);
            self.prune(node.id, PruneReason::Integral);
            return Ok(false);
        }

        if self.params.rounding_heuristic {
            self.try_rounding(&lp.primal, node.id)?;
            if self.cut_off(bound) {
                self.prune(node.id, PruneReason::Bound);
                return Ok(false);
            }
        }

        self.events.push(EngineEvent::AwaitingBranch {
            node: node.id,
            candidates: candidates.iter().map(|c| c.variable).collect(),
        });
        self.focus = Some(FocusNode { node, lower, upper, lp, bound, candidates });
        self.status = SolveStatus::AwaitingBranch;
        self.record();
        Ok(true)
    }

    fn prune(&mut self, node: u64, reason: PruneReason) {
        self.events.push(EngineEvent::NodePruned { node, reason, before_lp: false });
        self.record();
    }

    fn try_rounding(&mut self, primal: &[f64], node: u64) -> Result<(), EngineError> {
        let values: Vec<f64> = (0..primal.len())
            .map(|j| {
                let x = if self.integral[j] { primal[j].round() } else { primal[j] };
                x.clamp(self.root_lower[j], self.root_upper[j])
            })
            .collect();
        let residual =
            feasibility_residual_with_bounds(&self.lp, &self.root_lower, &self.root_upper, &values)?;
        if residual <= self.params.simplex.tolerances.feas_tol {
            self.offer(values, node, IncumbentSource::Rounding);
        }
        Ok(())
    }

    /// Installs `values` as the incumbent if it improves on the current one.
    fn offer(&mut self, values: Vec<f64>, node: u64, source: IncumbentSource) {
        let min_obj = self.lp.objective_value(&values);
        if min_obj < self.primal_min() - 1e-9 {
            let objective = self.sign * min_obj;
            self.incumbent = Some(Incumbent { values, objective, node });
            self.events.push(EngineEvent::IncumbentFound { node, objective, source });
        }
    }

    fn split(&mut self, variable: usize) {
        let focus = self.focus.take().expect("focus exists while awaiting");
        let x = focus.lp.primal[variable];
        let warm = Arc::new(focus.lp.basis.clone());
        let down_id = self.take_id();
        let up_id = self.take_id();
        let parent = &focus.node;
        let child = |id, upper: bool, value: f64, distance: f64| {
            let mut changes = parent.bound_changes.clone();
            changes.push(BoundChange { variable, upper, value });
            SearchNode {
                id,
                parent: Some(parent.id),
                depth: parent.depth + 1,
                bound_changes: changes,
                dual_bound: focus.bound,
                warm: Some(warm.clone()),
                origin: Some(BranchOrigin {
                    variable,
                    up: !upper,
                    parent_objective: focus.lp.objective,
                    distance,
                }),
            }
        };
        let down = child(down_id, true, x.floor(), x - x.floor());
        let up = child(up_id, false, x.ceil(), x.ceil() - x);
        self.counters.nodes_created += 2;
        self.counters.branchings += 1;
        self.branch_counts[variable] += 1;
        self.events.push(EngineEvent::Branched {
            node: parent.id,
            variable,
            value: x,
            down_child: down_id,
            up_child: up_id,
        });
        self.push(down);
        self.push(up);
    }

    fn internal_choice(&mut self) -> usize {
        let candidates = &self.focus.as_ref().expect("awaiting").candidates;
        let fractions: Vec<(usize, f64)> =
            candidates.iter().map(|c| (c.variable, c.fractionality)).collect();
        match self.params.branching_rule {
            BranchingRule::Pseudocost => {
                let values: Vec<(usize, f64)> =
                    candidates.iter().map(|c| (c.variable, c.value)).collect();
                self.pseudocosts
                    .select(&values)
                    .or_else(|| most_infeasible(&fractions))
                    .expect("candidates are non-empty")
            }
            BranchingRule::MostInfeasible => most_infeasible(&fractions).expect("non-empty"),
            BranchingRule::Random => {
                let k = self.rng.gen_range(0..candidates.len());
                candidates[k].variable
            }
        }
    }

    fn finish(&mut self, status: SolveStatus) {
        self.status = status;
        self.focus = None;
        self.frozen_time = Some(self.wall_time());
        self.record();
        self.events.push(EngineEvent::Finished {
            status,
            counters: self.counters,
            primal_bound: user_value(self.sign, self.primal_min()),
            dual_bound: user_value(self.sign, self.dual_floor),
        });
    }

    /// Refreshes the global dual bound and appends a bound sample.
    fn record(&mut self) {
        let primal = self.primal_min();
        let computed = match self.status {
            SolveStatus::Optimal => primal,
            SolveStatus::Infeasible => f64::INFINITY,
            SolveStatus::Unbounded => f64::NEG_INFINITY,
            _ => {
                let open = self
                    .frontier
                    .iter()
                    .map(|o| o.node.dual_bound)
                    .chain(self.focus.as_ref().map(|f| f.bound))
                    .fold(f64::INFINITY, f64::min);
                open.min(primal)
            }
        };
        self.dual_floor = match self.status {
            SolveStatus::Optimal | SolveStatus::Unbounded => computed,
            _ => self.dual_floor.max(computed),
        };
        self.history.push(BoundSample {
            time: self.wall_time(),
            primal,
            dual: self.dual_floor,
        });
    }
}
