//! Native JSON instance format (`.mip.json`).
//!
//! ```json
//! {
//!   "format": "branchgym-mip",
//!   "version": 1,
//!   "name": "...",
//!   "sense": "minimize" | "maximize",
//!   "variables": [{"name": "x", "lower": 0.0, "upper": null, "kind": "binary", "objective": 1.0}],
//!   "constraints": [{"name": "c", "terms": [[0, 1.0]], "sense": "<=", "rhs": 1.0}],
//!   "metadata": {"family": "...", "params": {...}, "seed": 0, "index": 0}
//! }
//! ```
//!
//! Infinite bounds are written as `null`. The serialization is canonical:
//! equal instances produce identical bytes, so [`fingerprint`] can be used as
//! a structural hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    Constraint, ConstraintSense, GeneratorMetadata, MipInstance, ModelError, ObjectiveSense,
    VarKind, Variable,
};

const FORMAT_TAG: &str = "branchgym-mip";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    name: String,
    sense: ObjectiveSense,
    variables: Vec<VariableRecord>,
    constraints: Vec<ConstraintRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<GeneratorMetadata>,
}

#[derive(Serialize, Deserialize)]
struct VariableRecord {
    name: String,
    lower: Option<f64>,
    upper: Option<f64>,
    kind: VarKind,
    objective: f64,
}

#[derive(Serialize, Deserialize)]
struct ConstraintRecord {
    name: String,
    terms: Vec<(usize, f64)>,
    sense: ConstraintSense,
    rhs: f64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn to_string(instance: &MipInstance) -> Result<String, ModelError> {
    let doc = Document {
        format: FORMAT_TAG.into(),
        version: VERSION,
        name: instance.name().into(),
        sense: instance.sense(),
        variables: instance
            .variables()
            .iter()
            .map(|v| VariableRecord {
                name: v.name.clone(),
                lower: finite(v.lower),
                upper: finite(v.upper),
                kind: v.kind,
                objective: v.objective,
            })
            .collect(),
        constraints: instance
            .constraints()
            .iter()
            .map(|c| ConstraintRecord {
                name: c.name.clone(),
                terms: c.terms.clone(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect(),
        metadata: instance.metadata().cloned(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| ModelError::Invalid(e.to_string()))
}

pub fn from_str(text: &str) -> Result<MipInstance, ModelError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    if doc.format != FORMAT_TAG {
        return Err(ModelError::Parse {
            line: 1,
            message: format!("expected format `{FORMAT_TAG}`, found `{}`", doc.format),
        });
    }
    if doc.version != VERSION {
        return Err(ModelError::Unsupported {
            line: 1,
            feature: format!("native format version {}", doc.version),
        });
    }
    let variables = doc
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            lower: v.lower.unwrap_or(f64::NEG_INFINITY),
            upper: v.upper.unwrap_or(f64::INFINITY),
            kind: v.kind,
            objective: v.objective,
        })
        .collect();
    let constraints = doc
        .constraints
        .into_iter()
        .map(|c| Constraint {
            name: c.name,
            terms: c.terms,
            sense: c.sense,
            rhs: c.rhs,
        })
        .collect();
    let instance = MipInstance::new(doc.name, doc.sense, variables, constraints)?;
    Ok(match doc.metadata {
        Some(m) => instance.with_metadata(m),
        None => instance,
    })
}

/// SHA-256 of the native serialization, hex encoded.
pub fn fingerprint(instance: &MipInstance) -> String {
    let text = to_string(instance).expect("finite instance data always serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
