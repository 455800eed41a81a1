//! Reward functions with per-event delta semantics.
//!
//! A reward is a tree of metric leaves combined by negation, scaling and
//! addition. Each leaf keeps a snapshot of the engine counters taken at its
//! previous extraction and reports the change since then.

use std::fmt;
use std::ops::{Add, Mul, Neg};
use std::str::FromStr;

use thiserror::Error;

use crate::bnb::{BoundSample, Engine};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("reward protocol error: {0}")]
    Protocol(String),
    #[error("cannot parse reward expression `{expr}`: {message}")]
    Parse { expr: String, message: String },
}

/// Hooks called by an environment around every event.
pub trait RewardFunction {
    fn before_reset(&mut self, engine: &Engine);
    fn extract(&mut self, engine: &Engine, done: bool) -> Result<f64, RewardError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    NNodes,
    LpIterations,
    IsDone,
    SolvingTime,
    PrimalIntegral,
    DualIntegral,
    PrimalDualIntegral,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::NNodes,
        Metric::LpIterations,
        Metric::IsDone,
        Metric::SolvingTime,
        Metric::PrimalIntegral,
        Metric::DualIntegral,
        Metric::PrimalDualIntegral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::NNodes => "nnodes",
            Metric::LpIterations => "lpiterations",
            Metric::IsDone => "isdone",
            Metric::SolvingTime => "solvingtime",
            Metric::PrimalIntegral => "primalintegral",
            Metric::DualIntegral => "dualintegral",
            Metric::PrimalDualIntegral => "primaldualintegral",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    /// Case-insensitive, underscores ignored: `NNodes`, `lp_iterations`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| *c != '_').collect::<String>().to_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| format!("unknown reward `{s}`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Snapshot {
    epoch: Option<u64>,
    nodes: u64,
    iterations: u64,
    time: f64,
    cursor: usize,
    last_sample: Option<BoundSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    metric: Metric,
    /// Reference optimum for the integrals, in the instance's own sense.
    opt_ref: f64,
    snap: Snapshot,
}

impl Leaf {
    pub fn metric(&self) -> Metric {
        self.metric
    }

    fn before_reset(&mut self, engine: &Engine) {
        let c = engine.counters();
        self.snap = Snapshot {
            epoch: None,
            nodes: c.nodes_processed,
            iterations: c.lp_iterations_total,
            time: engine.wall_time(),
            cursor: engine.bound_history().len(),
            last_sample: engine.bound_history().last().copied(),
        };
    }

    fn extract(&mut self, engine: &Engine, done: bool) -> Result<f64, RewardError> {
        let epoch = engine.epoch();
        if self.snap.epoch == Some(epoch) {
            return Err(RewardError::Protocol(format!(
                "{} extracted twice for the same event",
                self.metric.name()
            )));
        }
        self.snap.epoch = Some(epoch);
        let c = engine.counters();
        let value = match self.metric {
            Metric::NNodes => (c.nodes_processed - self.snap.nodes) as f64,
            Metric::LpIterations => (c.lp_iterations_total - self.snap.iterations) as f64,
            Metric::IsDone => f64::from(u8::from(done)),
            Metric::SolvingTime => (engine.wall_time() - self.snap.time).max(0.0),
            Metric::PrimalIntegral | Metric::DualIntegral | Metric::PrimalDualIntegral => {
                self.integrate(engine)
            }
        };
        self.snap.nodes = c.nodes_processed;
        self.snap.iterations = c.lp_iterations_total;
        self.snap.time = engine.wall_time();
        Ok(value)
    }

    /// Trapezoid rule over the bound samples recorded since the snapshot.
    /// Gaps are taken in minimization form so they are non-negative for
    /// valid references; missing bounds fall back to the objective range
    /// over the root bound box.
    fn integrate(&mut self, engine: &Engine) -> f64 {
        let sign = engine.instance().sense().sign();
        let reference = sign * self.opt_ref;
        let (box_lo, box_hi) = engine.box_bounds_min();
        let metric = self.metric;
        let gap = |s: &BoundSample| {
            let p = if s.primal.is_finite() { s.primal } else { box_hi };
            let d = if s.dual.is_finite() { s.dual } else { box_lo };
            let g = match metric {
                Metric::PrimalIntegral => p - reference,
                Metric::DualIntegral => reference - d,
                _ => p - d,
            };
            if g.is_finite() {
                g
            } else {
                0.0
            }
        };
        let history = engine.bound_history();
        let mut total = 0.0;
        let mut prev = self.snap.last_sample;
        for s in &history[self.snap.cursor.min(history.len())..] {
            if let Some(p) = prev {
                total += (s.time - p.time).max(0.0) * 0.5 * (gap(&p) + gap(s));
            }
            prev = Some(*s);
        }
        self.snap.cursor = history.len();
        self.snap.last_sample = prev;
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reward {
    Leaf(Leaf),
    Constant(f64),
    Negate(Box<Reward>),
    Scale(f64, Box<Reward>),
    Sum(Box<Reward>, Box<Reward>),
}

impl Reward {
    pub fn metric(metric: Metric) -> Self {
        Reward::Leaf(Leaf { metric, opt_ref: 0.0, snap: Snapshot::default() })
    }

    pub fn nnodes() -> Self {
        Self::metric(Metric::NNodes)
    }

    pub fn lp_iterations() -> Self {
        Self::metric(Metric::LpIterations)
    }

    pub fn is_done() -> Self {
        Self::metric(Metric::IsDone)
    }

    pub fn solving_time() -> Self {
        Self::metric(Metric::SolvingTime)
    }

    pub fn primal_integral(opt_ref: f64) -> Self {
        Self::metric(Metric::PrimalIntegral).with_opt_ref(opt_ref)
    }

    pub fn dual_integral(opt_ref: f64) -> Self {
        Self::metric(Metric::DualIntegral).with_opt_ref(opt_ref)
    }

    pub fn primal_dual_integral(opt_ref: f64) -> Self {
        Self::metric(Metric::PrimalDualIntegral).with_opt_ref(opt_ref)
    }

    /// Sets the reference optimum on every leaf.
    pub fn with_opt_ref(mut self, opt_ref: f64) -> Self {
        self.for_each_leaf(&mut |l| l.opt_ref = opt_ref);
        self
    }

    fn for_each_leaf(&mut self, f: &mut dyn FnMut(&mut Leaf)) {
        match self {
            Reward::Leaf(l) => f(l),
            Reward::Constant(_) => {}
            Reward::Negate(r) | Reward::Scale(_, r) => r.for_each_leaf(f),
            Reward::Sum(a, b) => {
                a.for_each_leaf(f);
                b.for_each_leaf(f);
            }
        }
    }

    /// Parses `[-]name[*k][+EXPR]`, e.g. `-nnodes`, `lpiterations*0.5+isdone`.
    pub fn parse(expr: &str, opt_ref: f64) -> Result<Self, RewardError> {
        let err = |message: String| RewardError::Parse { expr: expr.to_string(), message };
        let mut total: Option<Reward> = None;
        for term in expr.split('+') {
            let term = term.trim();
            let (negated, rest) = match term.strip_prefix('-') {
                Some(r) => (true, r.trim()),
                None => (false, term),
            };
            let (name, factor) = match rest.split_once('*') {
                Some((n, k)) => {
                    let k: f64 = k.trim().parse().map_err(|_| err(format!("bad factor `{k}`")))?;
                    if !k.is_finite() {
                        return Err(err(format!("bad factor `{k}`")));
                    }
                    (n.trim(), Some(k))
                }
                None => (rest, None),
            };
            if name.is_empty() {
                return Err(err("empty term".into()));
            }
            let metric: Metric = name.parse().map_err(err)?;
            let mut r = Reward::metric(metric).with_opt_ref(opt_ref);
            if let Some(k) = factor {
                r = r * k;
            }
            if negated {
                r = -r;
            }
            total = Some(match total {
                None => r,
                Some(t) => t + r,
            });
        }
        total.ok_or_else(|| err("empty expression".into()))
    }
}

impl RewardFunction for Reward {
    fn before_reset(&mut self, engine: &Engine) {
        self.for_each_leaf(&mut |l| l.before_reset(engine));
    }

    fn extract(&mut self, engine: &Engine, done: bool) -> Result<f64, RewardError> {
        Ok(match self {
            Reward::Leaf(l) => l.extract(engine, done)?,
            Reward::Constant(c) => *c,
            Reward::Negate(r) => -r.extract(engine, done)?,
            Reward::Scale(k, r) => *k * r.extract(engine, done)?,
            Reward::Sum(a, b) => {
                let x = a.extract(engine, done)?;
                x + b.extract(engine, done)?
            }
        })
    }
}

impl Neg for Reward {
    type Output = Reward;

    fn neg(self) -> Reward {
        Reward::Negate(Box::new(self))
    }
}

impl Mul<f64> for Reward {
    type Output = Reward;

    fn mul(self, k: f64) -> Reward {
        Reward::Scale(k, Box::new(self))
    }
}

impl Add for Reward {
    type Output = Reward;

    fn add(self, other: Reward) -> Reward {
        Reward::Sum(Box::new(self), Box::new(other))
    }
}

impl Add<f64> for Reward {
    type Output = Reward;

    fn add(self, c: f64) -> Reward {
        self + Reward::Constant(c)
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reward::Leaf(l) => f.write_str(l.metric.name()),
            Reward::Constant(c) => write!(f, "{c}"),
            Reward::Negate(r) => write!(f, "-({r})"),
            Reward::Scale(k, r) => write!(f, "({r})*{k}"),
            Reward::Sum(a, b) => write!(f, "{a}+{b}"),
        }
    }
}

/// A reward that is always zero; for environments that need none.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoReward;

impl RewardFunction for NoReward {
    fn before_reset(&mut self, _engine: &Engine) {}

    fn extract(&mut self, _engine: &Engine, _done: bool) -> Result<f64, RewardError> {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{EngineParams, ParamMap, ParamValue, SolveStatus};
    use crate::model::{ConstraintSense, InstanceBuilder, ObjectiveSense, VarKind};
    use std::sync::Arc;

    fn knapsack_engine() -> Engine {
        let mut b = InstanceBuilder::new("knapsack", ObjectiveSense::Maximize);
        let x = b.add_variable("x", 0.0, 1.0, VarKind::Binary, 5.0).unwrap();
        let y = b.add_variable("y", 0.0, 1.0, VarKind::Binary, 4.0).unwrap();
        b.add_constraint("cap", vec![(x, 3.0), (y, 2.0)], ConstraintSense::Le, 4.0).unwrap();
        let mut e = Engine::new(Arc::new(b.build().unwrap()), EngineParams::default(), 0).unwrap();
        let map: ParamMap = [("rounding_heuristic".to_string(), ParamValue::Bool(false))].into();
        e.set_params(&map).unwrap();
        e
    }

    #[test]
    fn root_counts_one_node() {
        let mut e = knapsack_engine();
        let mut r = Reward::nnodes();
        let mut neg = -Reward::nnodes();
        r.before_reset(&e);
        neg.before_reset(&e);
        e.start().unwrap();
        assert_eq!(r.extract(&e, false).unwrap(), 1.0);
        assert_eq!(neg.extract(&e, false).unwrap(), -1.0);
    }

    #[test]
    fn second_extract_on_one_event_is_rejected() {
        let mut e = knapsack_engine();
        let mut r = Reward::lp_iterations();
        r.before_reset(&e);
        e.start().unwrap();
        r.extract(&e, false).unwrap();
        assert!(matches!(r.extract(&e, false), Err(RewardError::Protocol(_))));
    }

    #[test]
    fn is_done_tracks_the_flag() {
        let mut e = knapsack_engine();
        let mut r = Reward::is_done();
        r.before_reset(&e);
        e.start().unwrap();
        assert_eq!(r.extract(&e, false).unwrap(), 0.0);
        e.autosolve().unwrap();
        assert_eq!(e.status(), SolveStatus::Optimal);
        assert_eq!(r.extract(&e, true).unwrap(), 1.0);
    }

    #[test]
    fn scaling_and_zero_scaling() {
        let mut e = knapsack_engine();
        let mut twice = Reward::nnodes() * 2.0;
        let mut zero = Reward::lp_iterations() * 0.0;
        twice.before_reset(&e);
        zero.before_reset(&e);
        e.start().unwrap();
        twice.extract(&e, false).unwrap();
        zero.extract(&e, false).unwrap();
        let before = e.counters().nodes_processed;
        e.branch(0).unwrap();
        let created = (e.counters().nodes_processed - before) as f64;
        assert_eq!(twice.extract(&e, e.status().is_terminal()).unwrap(), 2.0 * created);
        assert_eq!(zero.extract(&e, false).unwrap(), 0.0);
    }

    #[test]
    fn parser_builds_expected_trees() {
        assert_eq!(Reward::parse("-nnodes", 0.0).unwrap(), -Reward::nnodes());
        assert_eq!(
            Reward::parse("lp_iterations*0.5 + IsDone", 0.0).unwrap(),
            Reward::lp_iterations() * 0.5 + Reward::is_done()
        );
        assert_eq!(
            Reward::parse("primalintegral", 3.0).unwrap(),
            Reward::primal_integral(3.0)
        );
        assert!(Reward::parse("", 0.0).is_err());
        assert!(Reward::parse("nodes", 0.0).is_err());
        assert!(Reward::parse("nnodes*x", 0.0).is_err());
        assert!(Reward::parse("nnodes+", 0.0).is_err());
    }

    #[test]
    fn constant_addition() {
        let e = knapsack_engine();
        let mut r = Reward::Constant(1.5) + 2.0;
        r.before_reset(&e);
        assert_eq!(r.extract(&e, false).unwrap(), 3.5);
    }

    #[test]
    fn integrals_are_non_negative_with_valid_reference() {
        let mut e = knapsack_engine();
        let mut p = Reward::primal_integral(5.0);
        let mut d = Reward::dual_integral(5.0);
        let mut pd = Reward::primal_dual_integral(5.0);
        for r in [&mut p, &mut d, &mut pd] {
            r.before_reset(&e);
        }
        e.start().unwrap();
        let mut sums = [0.0; 3];
        for (s, r) in sums.iter_mut().zip([&mut p, &mut d, &mut pd]) {
            *s += r.extract(&e, false).unwrap();
        }
        e.autosolve().unwrap();
        for (s, r) in sums.iter_mut().zip([&mut p, &mut d, &mut pd]) {
            *s += r.extract(&e, true).unwrap();
        }
        assert!(sums.iter().all(|s| *s >= 0.0), "{sums:?}");
        assert!((sums[0] + sums[1] - sums[2]).abs() < 1e-9);
    }
}
