use std::collections::BTreeMap;
use std::error::Error;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use branchgym::bench::{report_table, run_episodes, EpisodeSpec, TableFormat};
use branchgym::bnb::{parse_assignment, Engine, EngineParams, ParamMap};
use branchgym::env::Task;
use branchgym::generators::{preset, Family, GeneratorConfig, InstanceGenerator, Tier};
use branchgym::model::{read_problem, write_problem};
use branchgym::observations::ObservationKind;
use branchgym::policies::PolicyKind;
use clap::{Parser, Subcommand};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "branchgym", version, about = "Branch-and-bound environments over a built-in MIP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generated instances as .lp and .mip.json files.
    Generate {
        #[arg(long)]
        family: Family,
        /// Generator parameter overrides on top of the desk preset, `name=value`.
        #[arg(long, num_args = 1.., value_name = "K=V")]
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Solve one instance file with the built-in rules.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Engine parameter assignments, `name=value`.
        #[arg(long = "set", value_name = "K=V")]
        set: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the event log as JSON lines before the summary.
        #[arg(long)]
        trace: bool,
    },
    /// Run a batch of episodes and print a table.
    Run {
        #[arg(long = "env", default_value = "branching")]
        task: Task,
        #[arg(long, default_value = "none")]
        obs: ObservationKind,
        #[arg(long, default_value = "nnodes", allow_hyphen_values = true)]
        reward: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        opt_ref: f64,
        #[arg(long, default_value = "pseudocost")]
        policy: PolicyKind,
        #[arg(long, default_value = "ca")]
        family: Family,
        #[arg(long, default_value = "desk")]
        tier: Tier,
        /// Generator parameter overrides, applied on top of the desk preset.
        #[arg(long, num_args = 1.., value_name = "K=V")]
        params: Vec<String>,
        /// Engine parameters: played as the action in the configuring task,
        /// used as the starting parameters otherwise.
        #[arg(long = "set", value_name = "K=V")]
        set: Vec<String>,
        /// Half-open seed range `A..B`, or a single seed.
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn generator_overrides(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected name=value, got `{p}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn param_map(pairs: &[String]) -> Result<ParamMap> {
    let mut map = ParamMap::new();
    for p in pairs {
        let (k, v) = parse_assignment(p)?;
        map.insert(k, v);
    }
    Ok(map)
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
            if a >= b {
                return Err(format!("empty seed range `{text}`").into());
            }
            Ok((a..b).collect())
        }
        None => Ok(vec![text.trim().parse()?]),
    }
}

fn generate(family: Family, params: &[String], seed: u64, count: u64, out_dir: PathBuf) -> Result<()> {
    let overrides = generator_overrides(params)?;
    let config = GeneratorConfig::with_overrides(family, &overrides)?;
    let gen = InstanceGenerator::new(config, seed)?;
    fs::create_dir_all(&out_dir)?;
    for index in 0..count {
        let inst = gen.generate(index);
        for ext in ["lp", "mip.json"] {
            let path = out_dir.join(format!("{}.{ext}", inst.name()));
            write_problem(&inst, &path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn solve(instance: PathBuf, set: &[String], seed: u64, trace: bool) -> Result<()> {
    let inst = read_problem(&instance)?;
    let mut params = EngineParams::default();
    params.apply(&param_map(set)?)?;
    let mut engine = Engine::new(Arc::new(inst), params, seed)?;
    let status = engine.autosolve()?;
    if trace {
        for event in engine.events() {
            println!("{}", serde_json::to_string(event)?);
        }
    }
    let c = engine.counters();
    let finite = |v: f64| if v.is_finite() { serde_json::json!(v) } else { serde_json::Value::Null };
    let summary = serde_json::json!({
        "instance": engine.instance().name(),
        "status": status.name(),
        "objective": engine.incumbent().map(|i| i.objective),
        "primal_bound": finite(engine.primal_bound()),
        "dual_bound": finite(engine.dual_bound()),
        "gap": finite(engine.gap()),
        "nodes": c.nodes_processed,
        "nodes_created": c.nodes_created,
        "lp_iterations": c.lp_iterations_total,
        "wall_time": engine.wall_time(),
    });
    println!("{summary}");
    Ok(())
}

fn run(cli: Command) -> Result<()> {
    match cli {
        Command::Generate { family, params, seed, count, out_dir } => generate(family, &params, seed, count, out_dir),
        Command::Solve { instance, set, seed, trace } => solve(instance, &set, seed, trace),
        Command::Run { task, obs, reward, opt_ref, policy, family, tier, params, set, seeds, threads, format, out } => {
            let generator = if params.is_empty() {
                preset(family, tier)
            } else {
                GeneratorConfig::with_overrides(family, &generator_overrides(&params)?)?
            };
            let mut spec = EpisodeSpec::branching(generator, policy);
            spec.task = task;
            spec.observation = obs;
            spec.reward = reward;
            spec.opt_ref = opt_ref;
            let assignments = param_map(&set)?;
            if task == Task::Configuring {
                spec.configuration = assignments;
            } else {
                spec.params.apply(&assignments)?;
            }
            let report = run_episodes(&spec, &parse_seeds(&seeds)?, threads)?;
            let table = report_table(&report, format);
            match out {
                Some(path) => fs::write(path, table)?,
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
