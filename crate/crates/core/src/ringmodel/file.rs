use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FiniteModel, ModelElement};
use crate::error::{Error, Result};

const ELEMENT_NAMES: [&str; 5] = ["one", "x", "y", "z", "sigma"];

/// On-disk form of a model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub p: u64,
    pub precision: u32,
    pub basis: Vec<String>,
    pub mul: Vec<Vec<Vec<u64>>>,
    pub elements: BTreeMap<String, Vec<u64>>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<FiniteModel> {
        let mut elements = self.elements;
        let mut take = |name: &str| {
            elements
                .remove(name)
                .map(ModelElement)
                .ok_or_else(|| Error::Parse(format!("model file lacks element {name:?}")))
        };
        let picked = [take("one")?, take("x")?, take("y")?, take("z")?, take("sigma")?];
        if let Some(extra) = elements.keys().next() {
            return Err(Error::Parse(format!("unknown element {extra:?} in model file")));
        }
        FiniteModel::new(self.p, self.precision, self.basis, self.mul, picked)
    }
}

impl FiniteModel {
    pub fn to_file(&self) -> ModelFile {
        let elements = ELEMENT_NAMES
            .iter()
            .zip([self.one(), self.x(), self.y(), self.z(), self.sigma()])
            .map(|(n, e)| (n.to_string(), e.0.clone()))
            .collect();
        ModelFile {
            p: self.p(),
            precision: self.precision(),
            basis: self.basis().to_vec(),
            mul: self.structure_constants(),
            elements,
        }
    }

    /// Compact JSON: one line per basis row of the structure table.
    pub fn to_json(&self) -> String {
        let f = self.to_file();
        let mut out = String::new();
        out.push_str(&format!("{{\"p\":{},\"precision\":{},\n", f.p, f.precision));
        out.push_str(&format!("\"basis\":{},\n", serde_json::to_string(&f.basis).unwrap()));
        out.push_str("\"elements\":{");
        let parts: Vec<String> =
            f.elements.iter().map(|(k, v)| format!("\"{k}\":{}", serde_json::to_string(v).unwrap())).collect();
        out.push_str(&parts.join(",\n  "));
        out.push_str("},\n\"mul\":[\n");
        let rows: Vec<String> = f.mul.iter().map(|row| serde_json::to_string(row).unwrap()).collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n]}\n");
        out
    }
}

/// Parses and validates a model file.
pub fn load_model(text: &str) -> Result<FiniteModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    file.into_model()
}
