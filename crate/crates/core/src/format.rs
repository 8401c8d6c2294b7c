//! JSON network files.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "version_label": "E",
//!   "variables": [{"id": "A", "name": "A", "outcomes": ["a1", "a2"]}],
//!   "parents": {"A": []},
//!   "cpts": {"A": [[0.4, 0.6]]}
//! }
//! ```
//!
//! CPT rows follow the parent-configuration order of [`crate::network::Configs`].
//! Floats are written in shortest round-trip form, so output is byte-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, Variable};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("network has {0} successor(s) awaiting reassessment and cannot be written")]
    Pending(usize),
}

impl FormatError {
    /// `(line, column)` of a JSON syntax or data error.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            FormatError::Json(e) => Some((e.line(), e.column())),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    format_version: u32,
    version_label: String,
    variables: Vec<Variable>,
    #[serde(default)]
    parents: BTreeMap<String, Vec<String>>,
    cpts: BTreeMap<String, Vec<Vec<f64>>>,
}

pub fn network_from_json(text: &str) -> Result<Network, FormatError> {
    let file: NetworkFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(file.format_version));
    }
    Ok(Network::new(
        file.version_label,
        file.variables,
        file.parents,
        file.cpts,
    ))
}

pub fn network_to_json(net: &Network) -> Result<String, FormatError> {
    if !net.pending().is_empty() {
        return Err(FormatError::Pending(net.pending().len()));
    }
    let file = NetworkFile {
        format_version: FORMAT_VERSION,
        version_label: net.version_label().to_string(),
        variables: net.variables().to_vec(),
        parents: net.parent_map().clone(),
        cpts: net
            .cpts()
            .iter()
            .map(|(id, cpt)| (id.clone(), cpt.rows.clone()))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}
