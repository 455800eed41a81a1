//! Seeded instance generators for four problem families.
//!
//! Instance `k` of a generator seeded with `s` is drawn from a ChaCha8
//! stream keyed by `s` with stream number `k`, so it does not depend on
//! which other instances were generated.

mod families;

pub use families::barabasi_albert;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GeneratorMetadata, MipInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("unknown preset tier `{0}` (expected desk or paper)")]
    UnknownTier(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CombinatorialAuction,
    SetCover,
    CapacitatedFacilityLocation,
    MaximumIndependentSet,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::CombinatorialAuction,
        Family::SetCover,
        Family::CapacitatedFacilityLocation,
        Family::MaximumIndependentSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::CombinatorialAuction => "combinatorial_auction",
            Family::SetCover => "set_cover",
            Family::CapacitatedFacilityLocation => "capacitated_facility_location",
            Family::MaximumIndependentSet => "maximum_independent_set",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Family::CombinatorialAuction => "ca",
            Family::SetCover => "sc",
            Family::CapacitatedFacilityLocation => "cfl",
            Family::MaximumIndependentSet => "mis",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Family {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.short_name() == s)
            .ok_or_else(|| GeneratorError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Solves in seconds.
    Desk,
    /// Larger, minute-scale instances.
    Paper,
}

impl FromStr for Tier {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Tier::Desk),
            "paper" => Ok(Tier::Paper),
            _ => Err(GeneratorError::UnknownTier(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorConfig {
    CombinatorialAuction { n_items: usize, n_bids: usize },
    SetCover { n_rows: usize, n_cols: usize, density: f64 },
    CapacitatedFacilityLocation { n_customers: usize, n_facilities: usize, ratio: f64 },
    MaximumIndependentSet { n_nodes: usize, affinity: usize },
}

impl GeneratorConfig {
    pub fn family(&self) -> Family {
        match self {
            GeneratorConfig::CombinatorialAuction { .. } => Family::CombinatorialAuction,
            GeneratorConfig::SetCover { .. } => Family::SetCover,
            GeneratorConfig::CapacitatedFacilityLocation { .. } => Family::CapacitatedFacilityLocation,
            GeneratorConfig::MaximumIndependentSet { .. } => Family::MaximumIndependentSet,
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let entries: Vec<(&str, f64)> = match *self {
            GeneratorConfig::CombinatorialAuction { n_items, n_bids } => {
                vec![("n_items", n_items as f64), ("n_bids", n_bids as f64)]
            }
            GeneratorConfig::SetCover { n_rows, n_cols, density } => vec![
                ("n_rows", n_rows as f64),
                ("n_cols", n_cols as f64),
                ("density", density),
            ],
            GeneratorConfig::CapacitatedFacilityLocation { n_customers, n_facilities, ratio } => vec![
                ("n_customers", n_customers as f64),
                ("n_facilities", n_facilities as f64),
                ("ratio", ratio),
            ],
            GeneratorConfig::MaximumIndependentSet { n_nodes, affinity } => {
                vec![("n_nodes", n_nodes as f64), ("affinity", affinity as f64)]
            }
        };
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Builds a configuration from `key=value` overrides on top of the
    /// family's desk preset.
    pub fn with_overrides(family: Family, overrides: &BTreeMap<String, f64>) -> Result<Self, GeneratorError> {
        let mut cfg = preset(family, Tier::Desk);
        for (key, &value) in overrides {
            let count = || -> Result<usize, GeneratorError> {
                if value >= 0.0 && value.fract() == 0.0 {
                    Ok(value as usize)
                } else {
                    Err(GeneratorError::InvalidParams(format!("{key} must be a non-negative integer")))
                }
            };
            let unknown = || GeneratorError::InvalidParams(format!("unknown parameter `{key}` for {family}"));
            match (&mut cfg, key.as_str()) {
                (GeneratorConfig::CombinatorialAuction { n_items, .. }, "n_items") => *n_items = count()?,
                (GeneratorConfig::CombinatorialAuction { n_bids, .. }, "n_bids") => *n_bids = count()?,
                (GeneratorConfig::SetCover { n_rows, .. }, "n_rows") => *n_rows = count()?,
                (GeneratorConfig::SetCover { n_cols, .. }, "n_cols") => *n_cols = count()?,
                (GeneratorConfig::SetCover { density, .. }, "density") => *density = value,
                (GeneratorConfig::CapacitatedFacilityLocation { n_customers, .. }, "n_customers") => {
                    *n_customers = count()?
                }
                (GeneratorConfig::CapacitatedFacilityLocation { n_facilities, .. }, "n_facilities") => {
                    *n_facilities = count()?
                }
                (GeneratorConfig::CapacitatedFacilityLocation { ratio, .. }, "ratio") => *ratio = value,
                (GeneratorConfig::MaximumIndependentSet { n_nodes, .. }, "n_nodes") => *n_nodes = count()?,
                (GeneratorConfig::MaximumIndependentSet { affinity, .. }, "affinity") => *affinity = count()?,
                _ => return Err(unknown()),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let fail = |m: String| Err(GeneratorError::InvalidParams(m));
        match *self {
            GeneratorConfig::CombinatorialAuction { n_items, n_bids } => {
                if n_items == 0 || n_bids == 0 {
                    return fail("n_items and n_bids must be positive".into());
                }
            }
            GeneratorConfig::SetCover { n_rows, n_cols, density } => {
                if n_rows == 0 || n_cols < 2 {
                    return fail("set cover needs n_rows >= 1 and n_cols >= 2".into());
                }
                if !(density > 0.0 && density <= 1.0) {
                    return fail(format!("density {density} outside (0, 1]"));
                }
                let expected = density * (n_rows * n_cols) as f64;
                let needed = n_cols.max(2 * n_rows) as f64;
                if expected < needed {
                    return fail(format!(
                        "density {density} gives {expected:.1} expected nonzeros, fewer than the {needed} the coverage repair needs"
                    ));
                }
            }
            GeneratorConfig::CapacitatedFacilityLocation { n_customers, n_facilities, ratio } => {
                if n_customers == 0 || n_facilities == 0 {
                    return fail("n_customers and n_facilities must be positive".into());
                }
                if !(ratio.is_finite() && ratio >= 1.0) {
                    return fail(format!("capacity ratio {ratio} must be >= 1"));
                }
            }
            GeneratorConfig::MaximumIndependentSet { n_nodes, affinity } => {
                if affinity == 0 || n_nodes <= affinity {
                    return fail("need 1 <= affinity < n_nodes".into());
                }
            }
        }
        Ok(())
    }
}

/// Preset configuration for one family and tier.
pub fn preset(family: Family, tier: Tier) -> GeneratorConfig {
    match (family, tier) {
        (Family::CombinatorialAuction, Tier::Desk) => {
            GeneratorConfig::CombinatorialAuction { n_items: 50, n_bids: 60 }
        }
        (Family::CombinatorialAuction, Tier::Paper) => {
            GeneratorConfig::CombinatorialAuction { n_items: 100, n_bids: 500 }
        }
        (Family::SetCover, Tier::Desk) => {
            GeneratorConfig::SetCover { n_rows: 50, n_cols: 250, density: 0.05 }
        }
        (Family::SetCover, Tier::Paper) => {
            GeneratorConfig::SetCover { n_rows: 500, n_cols: 1000, density: 0.05 }
        }
        (Family::CapacitatedFacilityLocation, Tier::Desk) => {
            GeneratorConfig::CapacitatedFacilityLocation { n_customers: 25, n_facilities: 10, ratio: 5.0 }
        }
        (Family::CapacitatedFacilityLocation, Tier::Paper) => {
            GeneratorConfig::CapacitatedFacilityLocation { n_customers: 100, n_facilities: 100, ratio: 5.0 }
        }
        (Family::MaximumIndependentSet, Tier::Desk) => {
            GeneratorConfig::MaximumIndependentSet { n_nodes: 60, affinity: 4 }
        }
        (Family::MaximumIndependentSet, Tier::Paper) => {
            GeneratorConfig::MaximumIndependentSet { n_nodes: 500, affinity: 4 }
        }
    }
}

/// Looks a preset up by tier name.
pub fn preset_by_name(family: Family, tier: &str) -> Result<GeneratorConfig, GeneratorError> {
    Ok(preset(family, tier.parse()?))
}

pub fn desk_presets() -> Vec<GeneratorConfig> {
    Family::ALL.iter().map(|&f| preset(f, Tier::Desk)).collect()
}

pub fn paper_presets() -> Vec<GeneratorConfig> {
    Family::ALL.iter().map(|&f| preset(f, Tier::Paper)).collect()
}

/// An infinite, seeded stream of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGenerator {
    config: GeneratorConfig,
    seed: u64,
    next_index: u64,
}

impl InstanceGenerator {
    pub fn new(config: GeneratorConfig, seed: u64) -> Result<Self, GeneratorError> {
        config.validate()?;
        Ok(Self { config, seed, next_index: 0 })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Instance number `index` of this stream.
    pub fn generate(&self, index: u64) -> MipInstance {
        let mut rng = self.rng(index);
        let family = self.config.family();
        let name = format!("{}-s{}-i{}", family.short_name(), self.seed, index);
        let instance = match self.config {
            GeneratorConfig::CombinatorialAuction { n_items, n_bids } => {
                families::combinatorial_auction(&name, n_items, n_bids, &mut rng)
            }
            GeneratorConfig::SetCover { n_rows, n_cols, density } => {
                families::set_cover(&name, n_rows, n_cols, density, &mut rng)
            }
            GeneratorConfig::CapacitatedFacilityLocation { n_customers, n_facilities, ratio } => {
                families::facility_location(&name, n_customers, n_facilities, ratio, &mut rng)
            }
            GeneratorConfig::MaximumIndependentSet { n_nodes, affinity } => {
                families::independent_set(&name, n_nodes, affinity, &mut rng)
            }
        };
        instance.with_metadata(GeneratorMetadata {
            family: family.name().to_string(),
            params: self.config.params(),
            seed: self.seed,
            index,
        })
    }

    /// Edge list of the graph behind instance `index`, for the independent
    /// set family.
    pub fn graph(&self, index: u64) -> Option<Vec<(usize, usize)>> {
        match self.config {
            GeneratorConfig::MaximumIndependentSet { n_nodes, affinity } => {
                Some(barabasi_albert(n_nodes, affinity, &mut self.rng(index)))
            }
            _ => None,
        }
    }
}

impl Iterator for InstanceGenerator {
    type Item = MipInstance;

    fn next(&mut self) -> Option<MipInstance> {
        let instance = self.generate(self.next_index);
        self.next_index += 1;
        Some(instance)
    }
}
