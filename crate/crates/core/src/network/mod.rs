//! Network data model: variables, parent lists and conditional probability
//! tables, plus the indexing scheme that ties CPT rows to parent
//! configurations.

mod config;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{config_at, config_count, config_index, Configs, ParentConfig};
pub use validate::{validate_network, validate_with_tolerance, Finding, ValidationReport};

/// Row-sum tolerance for stored distributions.
pub const EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` has no outcome `{outcome}`")]
    UnknownOutcome { node: String, outcome: String },
    #[error("configuration {config} is out of range for radices {radices:?}")]
    ConfigOutOfRange { config: String, radices: Vec<usize> },
    #[error("row index {index} out of range ({count} configurations)")]
    RowOutOfRange { index: usize, count: usize },
    #[error("configuration count overflows")]
    ConfigOverflow,
}

/// A discrete chance variable with an ordered outcome space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Variable {
    pub fn new(id: &str, outcomes: &[&str]) -> Self {
        Variable {
            id: id.to_string(),
            name: id.to_string(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }
}

/// Conditional probability table: one distribution over the node's outcomes
/// per parent configuration, rows in [`Configs`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub node: String,
    pub parent_order: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Cpt {
    /// Free parameters in the table: `q - 1` per row of a `q`-outcome node.
    pub fn free_cells(&self) -> usize {
        self.rows.iter().map(|r| r.len().saturating_sub(1)).sum()
    }
}

/// How an outcome-space change on a parent maps the parent's new outcome
/// indices back onto the old ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PendingKind {
    IgnoredOutcome,
    SplitOutcome,
}

/// A successor whose CPT still has the pre-change shape after one of its
/// parents changed outcome space. Resolved by reusing rows or replacing the
/// table.
#[derive(Debug, Clone, PartialEq)]
pub struct Pending {
    pub successor: String,
    pub changed_parent: String,
    pub kind: PendingKind,
    /// For each outcome of the changed parent in the new state, the old
    /// outcome index it carries over from (`None` for new outcomes).
    pub carried: Vec<Option<usize>>,
    /// Outcome count of the changed parent before the change.
    pub old_radix: usize,
}

/// Immutable snapshot of a knowledge base under one state of information.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    version_label: String,
    variables: Vec<Variable>,
    parents: BTreeMap<String, Vec<String>>,
    cpts: BTreeMap<String, Cpt>,
    pending: Vec<Pending>,
}

impl Network {
    /// Assembles a network without checking any invariant; use
    /// [`validate_network`] on the result.
    pub fn new(
        version_label: impl Into<String>,
        variables: Vec<Variable>,
        parents: BTreeMap<String, Vec<String>>,
        cpt_rows: BTreeMap<String, Vec<Vec<f64>>>,
    ) -> Self {
        let cpts = cpt_rows
            .into_iter()
            .map(|(id, rows)| {
                let parent_order = parents.get(&id).cloned().unwrap_or_default();
                (
                    id.clone(),
                    Cpt {
                        node: id,
                        parent_order,
                        rows,
                    },
                )
            })
            .collect();
        Network {
            version_label: version_label.into(),
            variables,
            parents,
            cpts,
            pending: Vec::new(),
        }
    }

    pub fn builder(version_label: &str) -> NetworkBuilder {
        NetworkBuilder {
            label: version_label.to_string(),
            variables: Vec::new(),
            parents: BTreeMap::new(),
            rows: BTreeMap::new(),
        }
    }

    pub fn version_label(&self) -> &str {
        &self.version_label
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn require(&self, id: &str) -> Result<&Variable, NetworkError> {
        self.variable(id)
            .ok_or_else(|| NetworkError::UnknownNode(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.variable(id).is_some()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    /// Parent ids in CPT order; empty for roots and unknown ids.
    pub fn parents(&self, id: &str) -> &[String] {
        self.parents.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parent_map(&self) -> &BTreeMap<String, Vec<String>> {
        &self.parents
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.cpts.get(id)
    }

    pub fn cpts(&self) -> &BTreeMap<String, Cpt> {
        &self.cpts
    }

    /// Direct successors of `id`, in variable declaration order.
    pub fn children(&self, id: &str) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| self.parents(&v.id).iter().any(|p| p == id))
            .map(|v| v.id.as_str())
            .collect()
    }

    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        self.parents(to).iter().any(|p| p == from)
    }

    /// True if `target` can be reached from `from` along arcs.
    pub fn reaches(&self, from: &str, target: &str) -> bool {
        let mut stack = vec![from];
        let mut seen = std::collections::BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == target {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.children(n));
            }
        }
        false
    }

    /// Outcome counts of `id`'s parents under the current state.
    pub fn radices(&self, id: &str) -> Result<Vec<usize>, NetworkError> {
        self.parents(id)
            .iter()
            .map(|p| self.require(p).map(Variable::arity))
            .collect()
    }

    /// Radices the stored CPT of `id` is shaped for. Differs from
    /// [`Network::radices`] only while `id` awaits reassessment.
    pub fn table_radices(&self, id: &str) -> Result<Vec<usize>, NetworkError> {
        let mut radices = self.radices(id)?;
        if let Some(p) = self.pending_for(id) {
            if let Some(pos) = self.parents(id).iter().position(|x| *x == p.changed_parent) {
                radices[pos] = p.old_radix;
            }
        }
        Ok(radices)
    }

    pub fn pending(&self) -> &[Pending] {
        &self.pending
    }

    pub fn pending_for(&self, successor: &str) -> Option<&Pending> {
        self.pending.iter().find(|p| p.successor == successor)
    }

    pub fn enumerate_configs(&self, node: &str) -> Result<Vec<ParentConfig>, NetworkError> {
        enumerate_configs(self, node)
    }

    // Crate-internal mutation used by the maintenance transactions, which
    // always operate on a fresh clone.

    pub(crate) fn set_version_label(&mut self, label: String) {
        self.version_label = label;
    }

    pub(crate) fn variable_mut(&mut self, id: &str) -> Option<&mut Variable> {
        self.variables.iter_mut().find(|v| v.id == id)
    }

    pub(crate) fn push_variable(&mut self, var: Variable) {
        self.variables.push(var);
    }

    pub(crate) fn set_parents(&mut self, id: &str, parents: Vec<String>) {
        if let Some(cpt) = self.cpts.get_mut(id) {
            cpt.parent_order = parents.clone();
        }
        self.parents.insert(id.to_string(), parents);
    }

    pub(crate) fn set_rows(&mut self, id: &str, rows: Vec<Vec<f64>>) {
        let parent_order = self.parents(id).to_vec();
        self.cpts.insert(
            id.to_string(),
            Cpt {
                node: id.to_string(),
                parent_order,
                rows,
            },
        );
    }

    pub(crate) fn push_pending(&mut self, p: Pending) {
        self.pending.push(p);
    }

    pub(crate) fn take_pending(&mut self, successor: &str) -> Option<Pending> {
        let pos = self.pending.iter().position(|p| p.successor == successor)?;
        Some(self.pending.remove(pos))
    }
}

/// Convenience builder; performs no validation.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    label: String,
    variables: Vec<Variable>,
    parents: BTreeMap<String, Vec<String>>,
    rows: BTreeMap<String, Vec<Vec<f64>>>,
}

impl NetworkBuilder {
    pub fn root(self, id: &str, outcomes: &[&str], prior: &[f64]) -> Self {
        self.node(id, outcomes, &[], vec![prior.to_vec()])
    }

    pub fn node(mut self, id: &str, outcomes: &[&str], parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.variables.push(Variable::new(id, outcomes));
        self.parents
            .insert(id.to_string(), parents.iter().map(|s| s.to_string()).collect());
        self.rows.insert(id.to_string(), rows);
        self
    }

    pub fn build(self) -> Network {
        Network::new(self.label, self.variables, self.parents, self.rows)
    }
}

/// All parent configurations of `node`, in row order. Roots yield one empty
/// configuration.
pub fn enumerate_configs(net: &Network, node: &str) -> Result<Vec<ParentConfig>, NetworkError> {
    net.require(node)?;
    let radices = net.radices(node)?;
    config_count(&radices)?;
    Ok(Configs::new(&radices).collect())
}
