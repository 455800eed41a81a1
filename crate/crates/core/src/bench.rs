//! Parallel episode runner and benchmark tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bnb::{EngineParams, ParamMap, SolveStatus};
use crate::env::{Action, ActionSet, EnvError, Environment, Task};
use crate::generators::{GeneratorConfig, GeneratorError, InstanceGenerator};
use crate::model::MipInstance;
use crate::observations::{AnyObservation, ObservationKind};
use crate::policies::{Policy, PolicyKind};
use crate::rewards::{Reward, RewardError};

/// Shift of the shifted geometric mean, in nodes.
pub const NODE_SHIFT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("n_threads must be at least 1")]
    NoThreads,
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Everything needed to run one episode, apart from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub task: Task,
    pub observation: ObservationKind,
    /// Reward expression, see [`Reward::parse`].
    pub reward: String,
    pub opt_ref: f64,
    pub policy: PolicyKind,
    pub generator: GeneratorConfig,
    pub params: EngineParams,
    /// Parameter map played by the Configuring task.
    pub configuration: ParamMap,
}

impl EpisodeSpec {
    pub fn branching(generator: GeneratorConfig, policy: PolicyKind) -> Self {
        Self {
            task: Task::Branching,
            observation: ObservationKind::None,
            reward: "nnodes".into(),
            opt_ref: 0.0,
            policy,
            generator,
            params: EngineParams::default(),
            configuration: ParamMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.generator.validate()?;
        Reward::parse(&self.reward, self.opt_ref)?;
        Environment::new(self.task, AnyObservation(self.observation), Reward::nnodes(), self.params.clone())?;
        Ok(())
    }
}

/// Outcome of one episode. Everything except `wall_time` is deterministic
/// in (spec, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub family: String,
    pub policy: String,
    pub seed: u64,
    pub status: String,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall_time: f64,
    pub primal_bound: Option<f64>,
    pub dual_bound: Option<f64>,
    pub gap: Option<f64>,
    pub reward: f64,
    pub steps: u64,
    /// SHA-256 over the bytes of every observation in the episode.
    pub observation_digest: String,
    pub error: Option<String>,
}

impl EpisodeRow {
    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &EpisodeRow) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }
}

/// Per-policy aggregates over the rows without errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub family: String,
    pub policy: String,
    pub episodes: usize,
    pub solved: usize,
    pub nodes_geomean: f64,
    pub nodes_shifted_geomean: f64,
    pub lp_iterations_geomean: f64,
    pub wall_time_mean: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<EpisodeRow>,
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    shifted_geometric_mean(values, 0.0)
}

/// `exp(mean(ln(x + s))) - s`; NaN for an empty slice.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mean_log = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    mean_log.exp() - shift
}

impl BenchmarkReport {
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut groups: BTreeMap<(String, String), Vec<&EpisodeRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.family.clone(), r.policy.clone())).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((family, policy), rows)| {
                let ok: Vec<&&EpisodeRow> = rows.iter().filter(|r| r.error.is_none()).collect();
                let nodes: Vec<f64> = ok.iter().map(|r| r.nodes as f64).collect();
                let iters: Vec<f64> = ok.iter().map(|r| r.lp_iterations.max(1) as f64).collect();
                Aggregate {
                    family,
                    policy,
                    episodes: rows.len(),
                    solved: ok.iter().filter(|r| r.status == SolveStatus::Optimal.name()).count(),
                    nodes_geomean: geometric_mean(&nodes),
                    nodes_shifted_geomean: shifted_geometric_mean(&nodes, NODE_SHIFT),
                    lp_iterations_geomean: geometric_mean(&iters),
                    wall_time_mean: ok.iter().map(|r| r.wall_time).sum::<f64>() / ok.len().max(1) as f64,
                }
            })
            .collect()
    }

    /// Shifted geometric mean of nodes for one policy name.
    pub fn shifted_geomean_nodes(&self, policy: &str) -> f64 {
        let nodes: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.policy == policy && r.error.is_none())
            .map(|r| r.nodes as f64)
            .collect();
        shifted_geometric_mean(&nodes, NODE_SHIFT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
    JsonLines,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "json-lines" | "jsonl" => Ok(TableFormat::JsonLines),
            _ => Err(format!("unknown format `{s}` (expected csv, md or json-lines)")),
        }
    }
}

const ROW_COLUMNS: [&str; 14] = [
    "episode",
    "family",
    "policy",
    "seed",
    "status",
    "nodes",
    "lp_iterations",
    "wall_time",
    "primal_bound",
    "dual_bound",
    "gap",
    "reward",
    "steps",
    "error",
];

const AGGREGATE_COLUMNS: [&str; 8] = [
    "family",
    "policy",
    "episodes",
    "solved",
    "nodes_geomean",
    "nodes_shifted_geomean",
    "lp_iterations_geomean",
    "wall_time_mean",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row_cells(r: &EpisodeRow) -> Vec<String> {
    vec![
        r.episode.to_string(),
        r.family.clone(),
        r.policy.clone(),
        r.seed.to_string(),
        r.status.clone(),
        r.nodes.to_string(),
        r.lp_iterations.to_string(),
        format!("{:.6}", r.wall_time),
        opt(r.primal_bound),
        opt(r.dual_bound),
        opt(r.gap),
        r.reward.to_string(),
        r.steps.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

fn aggregate_cells(a: &Aggregate) -> Vec<String> {
    vec![
        a.family.clone(),
        a.policy.clone(),
        a.episodes.to_string(),
        a.solved.to_string(),
        format!("{:.4}", a.nodes_geomean),
        format!("{:.4}", a.nodes_shifted_geomean),
        format!("{:.4}", a.lp_iterations_geomean),
        format!("{:.6}", a.wall_time_mean),
    ]
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders the episode rows followed by per-policy aggregates. CSV
/// aggregates are `#`-prefixed lines; an empty report renders the header
/// only (nothing for json-lines).
pub fn report_table(report: &BenchmarkReport, format: TableFormat) -> String {
    let aggregates = report.aggregates();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let _ = writeln!(out, "{}", ROW_COLUMNS.join(","));
            for r in &report.rows {
                let cells: Vec<String> = row_cells(r).iter().map(|c| csv_cell(c)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            if !aggregates.is_empty() {
                let _ = writeln!(out, "# {}", AGGREGATE_COLUMNS.join(","));
                for a in &aggregates {
                    let _ = writeln!(out, "# {}", aggregate_cells(a).join(","));
                }
            }
        }
        TableFormat::Markdown => {
            let table = |out: &mut String, cols: &[&str], rows: Vec<Vec<String>>| {
                let _ = writeln!(out, "| {} |", cols.join(" | "));
                let _ = writeln!(out, "|{}", "---|".repeat(cols.len()));
                for cells in rows {
                    let cells: Vec<String> = cells.iter().map(|c| c.replace('|', "\\|")).collect();
                    let _ = writeln!(out, "| {} |", cells.join(" | "));
                }
            };
            table(&mut out, &ROW_COLUMNS, report.rows.iter().map(row_cells).collect());
            if !aggregates.is_empty() {
                out.push('\n');
                table(&mut out, &AGGREGATE_COLUMNS, aggregates.iter().map(aggregate_cells).collect());
            }
        }
        TableFormat::JsonLines => {
            for r in &report.rows {
                let mut v = serde_json::to_value(r).expect("rows serialize");
                v["type"] = "episode".into();
                let _ = writeln!(out, "{v}");
            }
            for a in &aggregates {
                let mut v = serde_json::to_value(a).expect("aggregates serialize");
                v["type"] = "aggregate".into();
                let _ = writeln!(out, "{v}");
            }
        }
    }
    out
}

/// Instance used for `seed`: instance 0 of the generator stream keyed by it.
pub fn episode_instance(generator: &GeneratorConfig, seed: u64) -> Result<MipInstance, GeneratorError> {
    Ok(InstanceGenerator::new(*generator, seed)?.generate(0))
}

/// Runs one episode on its own environment. Failures are recorded in the
/// row rather than returned.
pub fn run_episode(spec: &EpisodeSpec, episode: usize, seed: u64) -> EpisodeRow {
    let mut row = EpisodeRow {
        episode,
        family: spec.generator.family().short_name().to_string(),
        policy: match spec.task {
            Task::Branching => spec.policy.name().to_string(),
            Task::Configuring => "configuring".to_string(),
            Task::DefaultSolve => "default".to_string(),
        },
        seed,
        status: String::new(),
        nodes: 0,
        lp_iterations: 0,
        wall_time: 0.0,
        primal_bound: None,
        dual_bound: None,
        gap: None,
        reward: 0.0,
        steps: 0,
        observation_digest: String::new(),
        error: None,
    };
    if let Err(e) = play(spec, seed, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn play(spec: &EpisodeSpec, seed: u64, row: &mut EpisodeRow) -> Result<(), BenchError> {
    let instance = Arc::new(episode_instance(&spec.generator, seed)?);
    let reward = Reward::parse(&spec.reward, spec.opt_ref)?;
    let mut env = Environment::new(spec.task, AnyObservation(spec.observation), reward, spec.params.clone())?;
    env.seed(seed);
    let mut policy = Policy::new(spec.policy, seed);
    let mut digest = Sha256::new();

    let (obs, mut action_set, r, mut done) = env.reset(instance)?;
    if let Some(o) = obs {
        digest.update(o.to_bytes());
    }
    row.reward += r;
    while !done {
        let action = match &action_set {
            ActionSet::Candidates(c) => {
                let engine = env.engine().expect("reset done");
                Action::Branch(policy.choose(engine, c).map_err(|e| EnvError::InvalidAction(e.to_string()))?)
            }
            ActionSet::Parameters(_) => Action::Configure(spec.configuration.clone()),
            ActionSet::Empty => return Err(EnvError::Protocol("no actions before the end".into()).into()),
        };
        let (obs, a, r, d, _) = env.step(action)?;
        if let Some(o) = obs {
            digest.update(o.to_bytes());
        }
        row.reward += r;
        row.steps += 1;
        action_set = a;
        done = d;
    }
    let engine = env.engine().expect("reset done");
    let info = env.info().expect("reset done");
    row.status = info.status.name().to_string();
    row.nodes = info.nodes_processed;
    row.lp_iterations = info.lp_iterations_total;
    row.wall_time = info.wall_time;
    row.primal_bound = info.primal_bound;
    row.dual_bound = info.dual_bound;
    row.gap = Some(engine.gap()).filter(|g| g.is_finite());
    row.observation_digest = digest.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(())
}

/// Runs one episode per seed on a pool of `n_threads` workers. Rows come
/// back in seed order whatever the scheduling.
pub fn run_episodes(spec: &EpisodeSpec, seeds: &[u64], n_threads: usize) -> Result<BenchmarkReport, BenchError> {
    if n_threads == 0 {
        return Err(BenchError::NoThreads);
    }
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(k, &seed)| run_episode(spec, k, seed))
            .collect::<Vec<_>>()
    });
    Ok(BenchmarkReport { rows })
}
