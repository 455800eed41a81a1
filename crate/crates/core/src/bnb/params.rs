use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::SimplexOptions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    Unknown(String),
    #[error("parameter `{name}`: {value} is outside its domain ({domain})")]
    Domain {
        name: String,
        value: String,
        domain: String,
    },
    #[error("parameter changes are only accepted before solving starts")]
    AlreadyStarted,
    #[error("malformed assignment `{0}`, expected key=value")]
    Syntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSelection {
    /// Lowest dual bound first, lowest node id on ties.
    BestBound,
    /// Deepest node first, lowest node id on ties.
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingRule {
    Pseudocost,
    MostInfeasible,
    Random,
}

impl NodeSelection {
    pub const NAMES: [&'static str; 2] = ["best_bound", "dfs"];

    pub fn name(self) -> &'static str {
        match self {
            NodeSelection::BestBound => "best_bound",
            NodeSelection::Dfs => "dfs",
        }
    }
}

impl BranchingRule {
    pub const NAMES: [&'static str; 3] = ["pseudocost", "most_infeasible", "random"];

    pub fn name(self) -> &'static str {
        match self {
            BranchingRule::Pseudocost => "pseudocost",
            BranchingRule::MostInfeasible => "most_infeasible",
            BranchingRule::Random => "random",
        }
    }
}

/// Engine configuration. Everything reachable through a [`ParamMap`] is
/// listed in [`ParamSpace::engine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub node_selection: NodeSelection,
    pub branching_rule: BranchingRule,
    pub rounding_heuristic: bool,
    pub node_limit: Option<u64>,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub lp_iteration_limit: Option<u64>,
    pub int_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            node_selection: NodeSelection::BestBound,
            branching_rule: BranchingRule::Pseudocost,
            rounding_heuristic: true,
            node_limit: None,
            time_limit: None,
            lp_iteration_limit: None,
            int_tol: 1e-6,
            simplex: SimplexOptions::default(),
        }
    }
}

/// A loosely typed parameter value, as received from a caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Text(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for ParamValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "true" => ParamValue::Bool(true),
            "false" => ParamValue::Bool(false),
            _ => {
                if let Ok(i) = s.parse::<i64>() {
                    ParamValue::Int(i)
                } else if let Ok(x) = s.parse::<f64>() {
                    ParamValue::Float(x)
                } else {
                    ParamValue::Text(s.to_string())
                }
            }
        })
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Text(s.to_string())
    }
}

impl From<bool> for ParamValue {
    fn from(b: bool) -> Self {
        ParamValue::Bool(b)
    }
}

impl From<i64> for ParamValue {
    fn from(i: i64) -> Self {
        ParamValue::Int(i)
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Float(x)
    }
}

pub type ParamMap = BTreeMap<String, ParamValue>;

/// Parses `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, ParamValue), ParamError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| ParamError::Syntax(text.to_string()))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(ParamError::Syntax(text.to_string()));
    }
    let value = v.parse().expect("infallible");
    Ok((key.to_string(), value))
}

/// Domain of one tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamDomain {
    Choice { values: Vec<String> },
    Flag,
    PositiveInt,
    PositiveFloat,
}

impl fmt::Display for ParamDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamDomain::Choice { values } => write!(f, "one of {}", values.join(", ")),
            ParamDomain::Flag => write!(f, "on/off"),
            ParamDomain::PositiveInt => write!(f, "integer >= 1"),
            ParamDomain::PositiveFloat => write!(f, "number > 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDescriptor {
    pub name: String,
    pub domain: ParamDomain,
}

/// Discoverable description of the tunable parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub params: Vec<ParamDescriptor>,
}

impl ParamSpace {
    pub fn engine() -> Self {
        let choice = |names: &[&str]| ParamDomain::Choice {
            values: names.iter().map(|s| s.to_string()).collect(),
        };
        let entry = |name: &str, domain| ParamDescriptor {
            name: name.to_string(),
            domain,
        };
        Self {
            params: vec![
                entry("node_selection", choice(&NodeSelection::NAMES)),
                entry("branching_rule", choice(&BranchingRule::NAMES)),
                entry("rounding_heuristic", ParamDomain::Flag),
                entry("node_limit", ParamDomain::PositiveInt),
                entry("time_limit", ParamDomain::PositiveFloat),
                entry("lp_iteration_limit", ParamDomain::PositiveInt),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParamDescriptor> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

impl EngineParams {
    /// Applies every entry of `map`, or none of them if any is invalid.
    pub fn apply(&mut self, map: &ParamMap) -> Result<(), ParamError> {
        let mut next = self.clone();
        for (name, value) in map {
            next.apply_one(name, value)?;
        }
        *self = next;
        Ok(())
    }

    fn apply_one(&mut self, name: &str, value: &ParamValue) -> Result<(), ParamError> {
        let space = ParamSpace::engine();
        let descriptor = space
            .get(name)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        let bad = || ParamError::Domain {
            name: name.to_string(),
            value: value.to_string(),
            domain: descriptor.domain.to_string(),
        };
        match name {
            "node_selection" => {
                self.node_selection = match text(value).ok_or_else(bad)? {
                    "best_bound" => NodeSelection::BestBound,
                    "dfs" => NodeSelection::Dfs,
                    _ => return Err(bad()),
                }
            }
            "branching_rule" => {
                self.branching_rule = match text(value).ok_or_else(bad)? {
                    "pseudocost" => BranchingRule::Pseudocost,
                    "most_infeasible" => BranchingRule::MostInfeasible,
                    "random" => BranchingRule::Random,
                    _ => return Err(bad()),
                }
            }
            "rounding_heuristic" => {
                self.rounding_heuristic = match value {
                    ParamValue::Bool(b) => *b,
                    ParamValue::Text(s) if s == "on" => true,
                    ParamValue::Text(s) if s == "off" => false,
                    _ => return Err(bad()),
                }
            }
            "node_limit" => self.node_limit = Some(positive_int(value).ok_or_else(bad)?),
            "lp_iteration_limit" => {
                self.lp_iteration_limit = Some(positive_int(value).ok_or_else(bad)?)
            }
            "time_limit" => {
                let t = match value {
                    ParamValue::Int(i) => *i as f64,
                    ParamValue::Float(x) => *x,
                    _ => return Err(bad()),
                };
                if !(t > 0.0) {
                    return Err(bad());
                }
                self.time_limit = Some(t);
            }
            _ => unreachable!("descriptor exists for every handled name"),
        }
        Ok(())
    }

    /// The current values as a [`ParamMap`] (limits only when set).
    pub fn to_map(&self) -> ParamMap {
        let mut map = ParamMap::new();
        map.insert("node_selection".into(), self.node_selection.name().into());
        map.insert("branching_rule".into(), self.branching_rule.name().into());
        map.insert("rounding_heuristic".into(), self.rounding_heuristic.into());
        if let Some(n) = self.node_limit {
            map.insert("node_limit".into(), ParamValue::Int(n as i64));
        }
        if let Some(t) = self.time_limit {
            map.insert("time_limit".into(), ParamValue::Float(t));
        }
        if let Some(n) = self.lp_iteration_limit {
            map.insert("lp_iteration_limit".into(), ParamValue::Int(n as i64));
        }
        map
    }
}

fn text(value: &ParamValue) -> Option<&str> {
    match value {
        ParamValue::Text(s) => Some(s.as_str()),
        _ => None,
    }
}

fn positive_int(value: &ParamValue) -> Option<u64> {
    match value {
        ParamValue::Int(i) if *i >= 1 => Some(*i as u64),
        _ => None,
    }
}
