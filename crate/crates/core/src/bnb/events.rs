use serde::{Deserialize, Serialize};

use crate::lp::LpStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Running,
    AwaitingBranch,
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

impl SolveStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, SolveStatus::Running | SolveStatus::AwaitingBranch)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Running => "running",
            SolveStatus::AwaitingBranch => "awaiting_branch",
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitReached => "limit_reached",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    /// Node bound cannot beat the incumbent.
    Bound,
    Infeasible,
    /// LP solution is integral.
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncumbentSource {
    Lp,
    Rounding,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    pub nodes_processed: u64,
    pub nodes_created: u64,
    pub lp_iterations_total: u64,
    pub branchings: u64,
    /// Nodes discarded by bound before their LP was solved.
    pub pruned_before_lp: u64,
}

/// One entry of the engine's event log. Objective values are in the
/// instance's own sense; `None` stands for an infinite or absent value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EngineEvent {
    NodeSolved {
        node: u64,
        depth: u32,
        lp_status: LpStatus,
        objective: Option<f64>,
        lp_iterations: u64,
        counters: Counters,
    },
    NodePruned {
        node: u64,
        reason: PruneReason,
        before_lp: bool,
    },
    IncumbentFound {
        node: u64,
        objective: f64,
        source: IncumbentSource,
    },
    Branched {
        node: u64,
        variable: usize,
        value: f64,
        down_child: u64,
        up_child: u64,
    },
    AwaitingBranch {
        node: u64,
        candidates: Vec<usize>,
    },
    Finished {
        status: SolveStatus,
        counters: Counters,
        primal_bound: Option<f64>,
        dual_bound: Option<f64>,
    },
}
