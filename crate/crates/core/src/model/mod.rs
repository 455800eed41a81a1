//! MIP instances and their on-disk formats.
//!
//! Two formats are supported: a subset of the CPLEX LP text format (see
//! [`lp_format`]) and a native JSON document that also carries generator
//! metadata (see [`native`]). [`write_problem`] and [`read_problem`] pick the
//! format from the file extension.

pub mod lp_format;
pub mod native;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, LpRow, RowSense};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

impl ModelError {
    fn with_path(self, path: &Path) -> Self {
        match self {
            ModelError::Io { .. } | ModelError::File { .. } => self,
            other => ModelError::File {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

impl ObjectiveSense {
    /// `+1` for minimization, `-1` for maximization.
    pub fn sign(self) -> f64 {
        match self {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

pub type ConstraintSense = RowSense;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)` pairs.
    pub terms: Vec<(usize, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

/// Provenance of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub index: u64,
}

/// An immutable mixed-integer program.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    name: String,
    sense: ObjectiveSense,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    metadata: Option<GeneratorMetadata>,
}

impl MipInstance {
    pub fn new(
        name: impl Into<String>,
        sense: ObjectiveSense,
        variables: Vec<Variable>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ModelError> {
        let instance = Self {
            name: name.into(),
            sense,
            variables,
            constraints,
            metadata: None,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn with_metadata(mut self, metadata: GeneratorMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    fn validate(&self) -> Result<(), ModelError> {
        let invalid = |msg: String| Err(ModelError::Invalid(msg));
        let mut names = HashSet::new();
        for v in &self.variables {
            if v.name.is_empty() {
                return invalid("variable with empty name".into());
            }
            if !names.insert(v.name.as_str()) {
                return invalid(format!("duplicate variable name `{}`", v.name));
            }
            if v.lower.is_nan() || v.upper.is_nan() || !v.objective.is_finite() {
                return invalid(format!("variable `{}` has NaN data", v.name));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return invalid(format!("variable `{}` has an empty infinite bound", v.name));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return invalid(format!(
                    "binary variable `{}` has bounds [{}, {}] outside [0, 1]",
                    v.name, v.lower, v.upper
                ));
            }
        }
        let mut cnames = HashSet::new();
        for c in &self.constraints {
            if c.name.is_empty() {
                return invalid("constraint with empty name".into());
            }
            if !cnames.insert(c.name.as_str()) {
                return invalid(format!("duplicate constraint name `{}`", c.name));
            }
            if !c.rhs.is_finite() {
                return invalid(format!("constraint `{}` has a non-finite rhs", c.name));
            }
            for &(j, a) in &c.terms {
                if j >= self.variables.len() {
                    return invalid(format!(
                        "constraint `{}` references variable index {j}",
                        c.name
                    ));
                }
                if !a.is_finite() {
                    return invalid(format!("constraint `{}` has a non-finite coefficient", c.name));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn metadata(&self) -> Option<&GeneratorMetadata> {
        self.metadata.as_ref()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Objective value of `x` in the instance's own sense.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xv)| v.objective * xv).sum()
    }

    /// LP relaxation in minimization form: the objective is negated for
    /// maximization instances.
    pub fn lp_relaxation(&self) -> Result<LinearProgram, LpError> {
        let sign = self.sense.sign();
        LinearProgram::new(
            self.variables.iter().map(|v| sign * v.objective).collect(),
            self.variables.iter().map(|v| v.lower).collect(),
            self.variables.iter().map(|v| v.upper).collect(),
            self.constraints
                .iter()
                .map(|c| LpRow::new(c.terms.clone(), c.sense, c.rhs))
                .collect(),
        )
    }

    pub fn stats(&self) -> InstanceStats {
        stats(self)
    }

    /// Equality up to `tol` on numeric data, ignoring zero coefficients, term
    /// order and metadata.
    pub fn semantically_eq(&self, other: &MipInstance, tol: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= tol;
        if self.name != other.name
            || self.sense != other.sense
            || self.variables.len() != other.variables.len()
            || self.constraints.len() != other.constraints.len()
        {
            return false;
        }
        let vars_eq = self.variables.iter().zip(&other.variables).all(|(a, b)| {
            a.name == b.name
                && a.kind == b.kind
                && close(a.lower, b.lower)
                && close(a.upper, b.upper)
                && close(a.objective, b.objective)
        });
        let normalized = |c: &Constraint| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, a) in &c.terms {
                *acc.entry(j).or_default() += a;
            }
            acc.retain(|_, a| *a != 0.0);
            acc
        };
        vars_eq
            && self.constraints.iter().zip(&other.constraints).all(|(a, b)| {
                let (ta, tb) = (normalized(a), normalized(b));
                a.name == b.name
                    && a.sense == b.sense
                    && close(a.rhs, b.rhs)
                    && ta.len() == tb.len()
                    && ta.iter().zip(&tb).all(|((ja, va), (jb, vb))| ja == jb && close(*va, *vb))
            })
    }
}

/// Incremental construction of a [`MipInstance`].
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    name: String,
    sense: ObjectiveSense,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    metadata: Option<GeneratorMetadata>,
}

impl InstanceBuilder {
    pub fn new(name: impl Into<String>, sense: ObjectiveSense) -> Self {
        Self {
            name: name.into(),
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
            metadata: None,
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        objective: f64,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(ModelError::Invalid(format!(
                "binary variable `{name}` needs bounds within [0, 1]"
            )));
        }
        self.variables.push(Variable {
            name,
            lower,
            upper,
            kind,
            objective,
        });
        Ok(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if let Some(&(j, _)) = terms.iter().find(|(j, _)| *j >= self.variables.len()) {
            return Err(ModelError::Invalid(format!(
                "constraint `{name}` references unknown variable {j}"
            )));
        }
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn metadata(&mut self, metadata: GeneratorMetadata) -> &mut Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn build(self) -> Result<MipInstance, ModelError> {
        let mut instance = MipInstance::new(self.name, self.sense, self.variables, self.constraints)?;
        instance.metadata = self.metadata;
        Ok(instance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub n_vars: usize,
    pub n_binary: usize,
    pub n_integer: usize,
    pub n_continuous: usize,
    pub n_constraints: usize,
    pub n_nonzeros: usize,
    /// Fraction of variables with a nonzero objective coefficient.
    pub objective_density: f64,
}

pub fn stats(instance: &MipInstance) -> InstanceStats {
    let vars = instance.variables();
    let count = |k: VarKind| vars.iter().filter(|v| v.kind == k).count();
    let n_obj = vars.iter().filter(|v| v.objective != 0.0).count();
    InstanceStats {
        n_vars: vars.len(),
        n_binary: count(VarKind::Binary),
        n_integer: count(VarKind::Integer),
        n_continuous: count(VarKind::Continuous),
        n_constraints: instance.constraints().len(),
        n_nonzeros: instance
            .constraints()
            .iter()
            .map(|c| {
                // Duplicates merge and zeros drop, as in the LP relaxation.
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(j, a) in &c.terms {
                    *acc.entry(j).or_default() += a;
                }
                acc.values().filter(|a| **a != 0.0).count()
            })
            .sum(),
        objective_density: if vars.is_empty() { 0.0 } else { n_obj as f64 / vars.len() as f64 },
    }
}

/// On-disk format, chosen from the file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Lp,
    Native,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        if name.ends_with(".mip.json") || name.ends_with(".json") {
            Some(FileFormat::Native)
        } else if name.ends_with(".lp") {
            Some(FileFormat::Lp)
        } else {
            None
        }
    }
}

/// Writes `instance` to `path` as LP text (`.lp`) or native JSON (`.mip.json`).
pub fn write_problem(instance: &MipInstance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let text = match FileFormat::from_path(path) {
        Some(FileFormat::Native) => native::to_string(instance),
        Some(FileFormat::Lp) | None => lp_format::to_string(instance),
    }
    .map_err(|e| e.with_path(path))?;
    std::fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an instance written in either supported format.
pub fn read_problem(path: impl AsRef<Path>) -> Result<MipInstance, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match FileFormat::from_path(path) {
        Some(FileFormat::Native) => native::from_str(&text),
        _ => {
            let stem = path
                .file_name()
                .and_then(|s| s.to_str())
                .map(|s| s.trim_end_matches(".lp").to_string())
                .unwrap_or_default();
            lp_format::from_str(&text, &stem)
        }
    }
    .map_err(|e| match e {
        ModelError::Parse { .. } | ModelError::Unsupported { .. } => e,
        other => other.with_path(path),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_instance_has_zero_stats() {
        let inst = InstanceBuilder::new("empty", ObjectiveSense::Minimize).build().unwrap();
        let s = inst.stats();
        assert_eq!(
            s,
            InstanceStats {
                n_vars: 0,
                n_binary: 0,
                n_integer: 0,
                n_continuous: 0,
                n_constraints: 0,
                n_nonzeros: 0,
                objective_density: 0.0,
            }
        );
    }

    #[test]
    fn stats_count_kinds_and_nonzeros() {
        let mut b = InstanceBuilder::new("s", ObjectiveSense::Minimize);
        let x = b.add_variable("x", 0.0, 1.0, VarKind::Binary, 1.0).unwrap();
        let y = b.add_variable("y", 0.0, 5.0, VarKind::Integer, 0.0).unwrap();
        let z = b.add_variable("z", 0.0, f64::INFINITY, VarKind::Continuous, 2.0).unwrap();
        b.add_constraint("c0", vec![(x, 1.0), (y, 1.0), (z, 0.0)], RowSense::Le, 3.0).unwrap();
        b.add_constraint("c1", vec![(z, 1.0)], RowSense::Ge, 1.0).unwrap();
        let s = b.build().unwrap().stats();
        assert_eq!((s.n_binary, s.n_integer, s.n_continuous), (1, 1, 1));
        assert_eq!(s.n_binary + s.n_integer + s.n_continuous, s.n_vars);
        assert_eq!(s.n_nonzeros, 3);
        assert!((s.objective_density - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut b = InstanceBuilder::new("d", ObjectiveSense::Minimize);
        b.add_variable("x", 0.0, 1.0, VarKind::Continuous, 0.0).unwrap();
        b.add_variable("x", 0.0, 1.0, VarKind::Continuous, 0.0).unwrap();
        assert!(matches!(b.build(), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn binary_bounds_are_enforced() {
        let mut b = InstanceBuilder::new("b", ObjectiveSense::Minimize);
        assert!(b.add_variable("x", 0.0, 2.0, VarKind::Binary, 0.0).is_err());
        let v = Variable {
            name: "x".into(),
            lower: -1.0,
            upper: 1.0,
            kind: VarKind::Binary,
            objective: 0.0,
        };
        assert!(MipInstance::new("b", ObjectiveSense::Minimize, vec![v], vec![]).is_err());
    }

    #[test]
    fn dangling_term_is_rejected() {
        let mut b = InstanceBuilder::new("t", ObjectiveSense::Minimize);
        assert!(b.add_constraint("c", vec![(0, 1.0)], RowSense::Le, 1.0).is_err());
    }

    #[test]
    fn maximization_relaxation_is_negated() {
        let mut b = InstanceBuilder::new("m", ObjectiveSense::Maximize);
        b.add_variable("x", 0.0, 1.0, VarKind::Binary, 5.0).unwrap();
        let lp = b.build().unwrap().lp_relaxation().unwrap();
        assert_eq!(lp.objective(), &[-5.0]);
    }

    #[test]
    fn format_follows_extension() {
        assert_eq!(FileFormat::from_path(Path::new("a/b.lp")), Some(FileFormat::Lp));
        assert_eq!(FileFormat::from_path(Path::new("x.mip.json")), Some(FileFormat::Native));
        assert_eq!(FileFormat::from_path(Path::new("x.mps")), None);
    }
}
