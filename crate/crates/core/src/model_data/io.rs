//! JSON instance documents, schema `coldchain-instance/1`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    DemandParams, Dimensions, Instance, NetworkParams, ObjectiveWeights, SupplierParams,
    VaccineParams,
};
use crate::robust::RobustConfig;

pub const SCHEMA: &str = "coldchain-instance/1";

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: field `{field}`: {msg}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        msg: String,
    },
    #[error("unsupported schema `{found}`, expected `{SCHEMA}`")]
    Schema { found: String },
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    schema: &'static str,
    dimensions: &'a Dimensions,
    suppliers: &'a [SupplierParams],
    network: &'a NetworkParams,
    vaccines: &'a [VaccineParams],
    demand: &'a DemandParams,
    weights: &'a ObjectiveWeights,
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    robust: Option<&'a RobustConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[allow(dead_code)]
    schema: String,
    dimensions: Dimensions,
    suppliers: Vec<SupplierParams>,
    network: NetworkParams,
    vaccines: Vec<VaccineParams>,
    demand: DemandParams,
    weights: ObjectiveWeights,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    robust: Option<RobustConfig>,
}

#[derive(Deserialize)]
struct SchemaProbe {
    schema: Option<String>,
}

pub fn to_json(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&DocumentRef {
        schema: SCHEMA,
        dimensions: &inst.dimensions,
        suppliers: &inst.suppliers,
        network: &inst.network,
        vaccines: &inst.vaccines,
        demand: &inst.demand,
        weights: &inst.weights,
        seed: inst.seed,
        robust: inst.robust.as_ref(),
    })
    .expect("instance serialization cannot fail");
    text.push('\n');
    text
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceIoError> {
    let syntax = |e: serde_json::Error, field: String| InstanceIoError::Parse {
        line: e.line(),
        column: e.column(),
        field,
        msg: e.to_string(),
    };
    let probe: SchemaProbe =
        serde_json::from_str(text).map_err(|e| syntax(e, "<document>".into()))?;
    match probe.schema.as_deref() {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(InstanceIoError::Schema {
                found: other.to_string(),
            })
        }
        None => {
            return Err(InstanceIoError::Schema {
                found: "<missing>".into(),
            })
        }
    }
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        syntax(e.into_inner(), field)
    })?;
    Ok(Instance {
        dimensions: doc.dimensions,
        suppliers: doc.suppliers,
        network: doc.network,
        vaccines: doc.vaccines,
        demand: doc.demand,
        weights: doc.weights,
        seed: doc.seed,
        robust: doc.robust,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceIoError> {
    let path = path.as_ref();
    fs::write(path, to_json(inst)).map_err(|source| InstanceIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}
