//! The `PSLAB-FIELD v1` file format: one JSON document holding a grid and
//! both components of a pair. Extra top-level keys carry per-tool metadata
//! and are preserved on read.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PslabError, Result};
use crate::field::grid::GridSpec;
use crate::field::scalar::{ScalarField, SolutionPair};

pub const FIELD_VERSION: &str = "PSLAB-FIELD v1";

#[derive(Debug, Serialize, Deserialize)]
struct FieldDoc {
    version: String,
    dim: usize,
    n: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    #[serde(default)]
    beta: Option<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

/// A pair read from disk together with whatever metadata travelled with it.
#[derive(Clone, Debug)]
pub struct FieldFile {
    pub pair: SolutionPair,
    pub metadata: BTreeMap<String, Value>,
}

pub fn field_to_json(pair: &SolutionPair, metadata: &BTreeMap<String, Value>) -> Result<String> {
    let g = pair.grid();
    let doc = FieldDoc {
        version: FIELD_VERSION.to_string(),
        dim: g.dim(),
        n: g.n().to_vec(),
        lo: g.lo().to_vec(),
        hi: g.hi().to_vec(),
        beta: Some(pair.beta()),
        u: pair.u().values().to_vec(),
        v: pair.v().values().to_vec(),
        extra: metadata.clone(),
    };
    serde_json::to_string(&doc).map_err(|e| PslabError::Format(e.to_string()))
}

pub fn field_from_json(text: &str) -> Result<FieldFile> {
    let doc: FieldDoc = serde_json::from_str(text).map_err(|e| PslabError::Format(e.to_string()))?;
    if doc.version != FIELD_VERSION {
        return Err(PslabError::Format(format!("unknown version `{}`", doc.version)));
    }
    if doc.n.len() != doc.dim || doc.lo.len() != doc.dim || doc.hi.len() != doc.dim {
        return Err(PslabError::Format(format!("shape arrays do not match dim {}", doc.dim)));
    }
    let grid = GridSpec::new(&doc.lo, &doc.hi, &doc.n)?;
    for (name, vals) in [("u", &doc.u), ("v", &doc.v)] {
        if vals.len() != grid.len() {
            return Err(PslabError::Format(format!(
                "shape mismatch: `{name}` has {} values, grid has {}",
                vals.len(),
                grid.len()
            )));
        }
    }
    let beta = match doc.beta {
        Some(b) => b,
        None => {
            log::warn!("field file has no `beta`; assuming 1");
            1.0
        }
    };
    let u = ScalarField::new(grid.clone(), doc.u)?;
    let v = ScalarField::new(grid, doc.v)?;
    Ok(FieldFile {
        pair: SolutionPair::new(u, v, beta)?,
        metadata: doc.extra,
    })
}

pub fn write_field(path: &Path, pair: &SolutionPair, metadata: &BTreeMap<String, Value>) -> Result<()> {
    fs::write(path, field_to_json(pair, metadata)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text = fs::read_to_string(path)?;
    field_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_pair() -> SolutionPair {
        let g = GridSpec::cube(2, -1.0, 1.0, 7).unwrap();
        let u = ScalarField::from_fn(g.clone(), |p| (p[1] * 0.1).exp() / 3.0).unwrap();
        let v = ScalarField::from_fn(g, |p| (p[0] + 1.0).sqrt() * std::f64::consts::PI).unwrap();
        SolutionPair::new(u, v, 0.7).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let pair = sample_pair();
        let mut meta = BTreeMap::new();
        meta.insert("sweeps".to_string(), Value::from(12));
        let back = field_from_json(&field_to_json(&pair, &meta).unwrap()).unwrap();
        assert_eq!(back.pair, pair);
        assert_eq!(back.metadata["sweeps"], Value::from(12));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let pair = sample_pair();
        let mut doc: Value = serde_json::from_str(&field_to_json(&pair, &BTreeMap::new()).unwrap()).unwrap();
        doc["u"].as_array_mut().unwrap().pop();
        let err = field_from_json(&doc.to_string()).unwrap_err();
        assert!(matches!(err, PslabError::Format(ref m) if m.contains("shape")));
    }

    #[test]
    fn unknown_version_rejected() {
        let pair = sample_pair();
        let mut doc: Value = serde_json::from_str(&field_to_json(&pair, &BTreeMap::new()).unwrap()).unwrap();
        doc["version"] = Value::from("PSLAB-FIELD v2");
        assert!(field_from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn missing_beta_defaults_to_one() {
        let pair = sample_pair();
        let mut doc: Value = serde_json::from_str(&field_to_json(&pair, &BTreeMap::new()).unwrap()).unwrap();
        doc.as_object_mut().unwrap().remove("beta");
        let back = field_from_json(&doc.to_string()).unwrap();
        assert_eq!(back.pair.beta(), 1.0);
    }
}
