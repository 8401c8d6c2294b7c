//! Edit transactions over a [`Network`].
//!
//! Every operation takes the current network by reference and returns a
//! [`Transaction`] holding an untouched copy of the input, the edited network
//! and an assessment report. The three probability-reusing cases are:
//!
//! * ignored outcome: new outcomes are appended and the old row is scaled by
//!   `λ_j = 1 - Σ new` ([`add_outcomes_ignored`]);
//! * split outcome: one outcome is replaced by parts whose probabilities are
//!   weights times the old value ([`split_outcome`]);
//! * assumed constant: a node gaining a predecessor keeps its old table as
//!   the block for the predecessor's baseline outcome
//!   ([`add_arc_assumed_constant`], [`add_variable`]).
//!
//! After an outcome-space change the changed node's successors still hold
//! tables shaped for the old outcomes. They are recorded as pending on the
//! network and must be resolved with [`reuse_successor_rows_ignored`],
//! [`reuse_successor_rows_split`] or [`replace_cpt`] before any other edit.

mod general;
mod op;
mod outcomes;
mod structure;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::audit::{audit_transaction, AssessmentReport};
use crate::network::{validate_network, Configs, Network, NetworkError, ParentConfig, EPSILON};

pub use general::{remove_arc, remove_outcome, replace_cpt, OutcomeRemoval};
pub use op::{apply_op, apply_script, parse_script, EditKind, EditOp, LabeledRow, Mode, ScriptError};
pub use outcomes::{
    add_outcomes_general, add_outcomes_ignored, reuse_successor_rows_ignored,
    reuse_successor_rows_split, split_outcome, split_outcome_general, SplitInput,
};
pub use structure::{add_arc_assumed_constant, add_arc_general, add_variable, SuccessorUpdate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("input network is invalid: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),
    #[error("successors awaiting reassessment: {}; resolve them first", .0.join(", "))]
    Pending(Vec<String>),
    #[error("`{successor}` is not awaiting reassessment for parent `{parent}`")]
    NotPending { successor: String, parent: String },
    #[error("`{successor}` awaits a {expected} reassessment, not {found}")]
    PendingKindMismatch {
        successor: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("mode {mode} is not allowed for {kind}")]
    ModeNotAllowed { kind: EditKind, mode: Mode },
    #[error("{0}")]
    MissingInput(String),
    #[error("outcome label `{label}` already used by `{node}`")]
    LabelCollision { node: String, label: String },
    #[error("variable `{0}` already exists")]
    DuplicateVariable(String),
    #[error("variable `{0}` must have at least one outcome and unique labels")]
    BadVariable(String),
    #[error("`{node}` expects {expected} configuration blocks, got {found}")]
    ConfigCount { node: String, expected: usize, found: usize },
    #[error("{node} [{config}]: {reason}")]
    BadRow { node: String, config: String, reason: String },
    #[error("{node} [{config}]: new-outcome mass {mass} exceeds 1")]
    MassExceeded { node: String, config: String, mass: f64 },
    #[error("{node} [{config}]: split weights sum to {sum}, expected 1")]
    WeightsSum { node: String, config: String, sum: f64 },
    #[error("{node} [{config}]: parts sum to {found}, but the split outcome had {expected}")]
    SplitMass {
        node: String,
        config: String,
        expected: f64,
        found: f64,
    },
    #[error("{node}: missing elicited row for [{config}]")]
    MissingRow { node: String, config: String },
    #[error("{node}: row for [{config}] is not needed")]
    UnexpectedRow { node: String, config: String },
    #[error("{node}: {reason}")]
    BadAssignment { node: String, reason: String },
    #[error("arc {from} -> {to} already exists")]
    ArcExists { from: String, to: String },
    #[error("arc {from} -> {to} does not exist")]
    ArcMissing { from: String, to: String },
    #[error("arc {from} -> {to} would create a cycle")]
    Cycle { from: String, to: String },
    #[error("replacement tables missing for {}", .0.join(", "))]
    MissingReplacement(Vec<String>),
    #[error("`{0}` is not affected by this edit")]
    UnexpectedReplacement(String),
    #[error("cannot remove the only outcome of `{0}`")]
    LastOutcome(String),
    #[error("{node} [{config}]: no mass left to renormalize")]
    ZeroMass { node: String, config: String },
    #[error("edit produced an invalid network: {}", .0.join("; "))]
    ResultInvalid(Vec<String>),
}

/// Where one row of an edited table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSource {
    /// Copied verbatim from the previous state.
    Copied,
    /// Old entries scaled by `λ_j`; the `new_entries` appended probabilities
    /// were elicited.
    Rescaled { new_entries: usize },
    /// One outcome replaced by `parts` weighted parts; `parts - 1` free weights.
    Split { parts: usize },
    /// Computed without new input (outcome removal with renormalization).
    Derived,
    /// Fully supplied by the expert.
    Elicited,
}

impl RowSource {
    /// Free parameters the expert supplied for a row of `arity` entries.
    pub fn elicited(&self, arity: usize) -> usize {
        match *self {
            RowSource::Copied | RowSource::Derived => 0,
            RowSource::Rescaled { new_entries } => new_entries,
            RowSource::Split { parts } => parts.saturating_sub(1),
            RowSource::Elicited => arity.saturating_sub(1),
        }
    }
}

/// Scaling factors computed by a special-case edit, one entry per parent
/// configuration of the changed node.
#[derive(Debug, Clone, PartialEq)]
pub enum RescaleFactors {
    /// `λ_j = 1 - Σ P(new outcomes | C_j)`.
    Ignored { lambdas: Vec<f64> },
    /// `λ_ij`, the share of the split outcome's mass given to part `i`.
    Split { weights: Vec<Vec<f64>> },
}

impl RescaleFactors {
    /// Range and normalization constraints on the factors.
    pub fn is_consistent(&self) -> bool {
        let unit = |x: &f64| (0.0..=1.0).contains(x);
        match self {
            RescaleFactors::Ignored { lambdas } => lambdas.iter().all(unit),
            RescaleFactors::Split { weights } => weights.iter().all(|w| {
                w.iter().all(unit) && (w.iter().sum::<f64>() - 1.0).abs() <= EPSILON
            }),
        }
    }
}

/// One applied edit: the network before and after, what was elicited and
/// what was reused.
#[derive(Debug, Clone, PartialEq)]
pub struct Transaction {
    pub before: Network,
    pub op: EditOp,
    pub after: Network,
    pub report: AssessmentReport,
    pub factors: Option<RescaleFactors>,
    /// Row origins for every table the edit rewrote.
    pub provenance: BTreeMap<String, Vec<RowSource>>,
    pub notes: Vec<String>,
}

/// `E` -> `E+1` -> `E+2` ...
pub fn next_version_label(label: &str) -> String {
    if let Some((base, n)) = label.rsplit_once('+') {
        if let Ok(n) = n.parse::<u64>() {
            return format!("{base}+{}", n + 1);
        }
    }
    format!("{label}+1")
}

/// Parents of a node with their outcome labels: the frame a CPT's rows are
/// indexed by.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Frame {
    pub parents: Vec<(String, Vec<String>)>,
}

impl Frame {
    pub fn of(net: &Network, node: &str) -> Result<Frame, EditError> {
        let parents = net
            .parents(node)
            .iter()
            .map(|p| Ok((p.clone(), net.require(p)?.outcomes.clone())))
            .collect::<Result<_, NetworkError>>()?;
        Ok(Frame { parents })
    }

    pub fn with_parent(mut self, id: &str, outcomes: &[String]) -> Frame {
        self.parents.push((id.to_string(), outcomes.to_vec()));
        self
    }

    pub fn radices(&self) -> Vec<usize> {
        self.parents.iter().map(|(_, o)| o.len()).collect()
    }

    pub fn configs(&self) -> Configs {
        Configs::new(&self.radices())
    }

    pub fn count(&self) -> Result<usize, EditError> {
        Ok(crate::network::config_count(&self.radices())?)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.parents.iter().position(|(p, _)| p == id)
    }

    pub fn label(&self, cfg: &ParentConfig) -> BTreeMap<String, String> {
        self.parents
            .iter()
            .zip(cfg.as_slice())
            .map(|((id, outcomes), &i)| (id.clone(), outcomes[i].clone()))
            .collect()
    }

    pub fn describe(&self, cfg: &ParentConfig) -> String {
        if self.parents.is_empty() {
            return "-".to_string();
        }
        self.parents
            .iter()
            .zip(cfg.as_slice())
            .map(|((id, outcomes), &i)| match outcomes.get(i) {
                Some(o) => format!("{id}={o}"),
                None => format!("{id}=#{i}"),
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Resolves a label assignment naming exactly this frame's parents.
    pub fn resolve(&self, node: &str, given: &BTreeMap<String, String>) -> Result<ParentConfig, EditError> {
        let bad = |reason: String| EditError::BadAssignment {
            node: node.to_string(),
            reason,
        };
        if given.len() != self.parents.len() {
            let expected: Vec<&str> = self.parents.iter().map(|(p, _)| p.as_str()).collect();
            let found: Vec<&str> = given.keys().map(String::as_str).collect();
            return Err(bad(format!(
                "assignment must name parents [{}], got [{}]",
                expected.join(","),
                found.join(",")
            )));
        }
        let mut digits = Vec::with_capacity(self.parents.len());
        for (id, outcomes) in &self.parents {
            let label = given
                .get(id)
                .ok_or_else(|| bad(format!("assignment does not name parent {id}")))?;
            let idx = outcomes
                .iter()
                .position(|o| o == label)
                .ok_or_else(|| bad(format!("parent {id} has no outcome {label}")))?;
            digits.push(idx);
        }
        Ok(ParentConfig::new(digits))
    }

    /// Labels a per-configuration block given in row order.
    pub fn labeled(&self, block: &[Vec<f64>]) -> Vec<LabeledRow> {
        self.configs()
            .zip(block)
            .map(|(cfg, probs)| LabeledRow {
                given: self.label(&cfg),
                probs: probs.clone(),
            })
            .collect()
    }

    pub fn labeled_map(&self, block: &BTreeMap<ParentConfig, Vec<f64>>) -> Vec<LabeledRow> {
        block
            .iter()
            .map(|(cfg, probs)| LabeledRow {
                given: if cfg.is_valid_for(&self.radices()) {
                    self.label(cfg)
                } else {
                    BTreeMap::new()
                },
                probs: probs.clone(),
            })
            .collect()
    }

    /// Labeled rows keyed by configuration; duplicates rejected.
    pub fn resolve_map(
        &self,
        node: &str,
        rows: &[LabeledRow],
    ) -> Result<BTreeMap<ParentConfig, Vec<f64>>, EditError> {
        let mut out = BTreeMap::new();
        for row in rows {
            let cfg = self.resolve(node, &row.given)?;
            if out.insert(cfg.clone(), row.probs.clone()).is_some() {
                return Err(EditError::BadAssignment {
                    node: node.to_string(),
                    reason: format!("configuration [{}] given twice", self.describe(&cfg)),
                });
            }
        }
        Ok(out)
    }

    /// Labeled rows covering every configuration, returned in row order.
    pub fn resolve_full(&self, node: &str, rows: &[LabeledRow]) -> Result<Vec<Vec<f64>>, EditError> {
        let mut map = self.resolve_map(node, rows)?;
        self.configs()
            .map(|cfg| {
                map.remove(&cfg).ok_or_else(|| EditError::MissingRow {
                    node: node.to_string(),
                    config: self.describe(&cfg),
                })
            })
            .collect()
    }
}

/// Range and normalization check for a fully elicited row.
pub(crate) fn check_distribution(
    node: &str,
    config: impl FnOnce() -> String,
    row: &[f64],
    arity: usize,
) -> Result<(), EditError> {
    let reason = if row.len() != arity {
        Some(format!("row has {} entries, expected {arity}", row.len()))
    } else if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(format!("entry {x} outside [0, 1]"))
    } else {
        let sum: f64 = row.iter().sum();
        ((sum - 1.0).abs() > EPSILON).then(|| format!("row sums to {sum}"))
    };
    match reason {
        Some(reason) => Err(EditError::BadRow {
            node: node.to_string(),
            config: config(),
            reason,
        }),
        None => Ok(()),
    }
}

/// Checks a complete table supplied for `node` over `frame`.
pub(crate) fn check_table(
    node: &str,
    frame: &Frame,
    rows: &[Vec<f64>],
    arity: usize,
) -> Result<(), EditError> {
    let expected = frame.count()?;
    if rows.len() != expected {
        return Err(EditError::ConfigCount {
            node: node.to_string(),
            expected,
            found: rows.len(),
        });
    }
    for (cfg, row) in frame.configs().zip(rows) {
        check_distribution(node, || frame.describe(&cfg), row, arity)?;
    }
    Ok(())
}

/// Checks the input network and the pending-reassessment gate. `resolving`
/// names the successor the edit resolves, if any.
pub(crate) fn begin(net: &Network, resolving: Option<&str>) -> Result<(), EditError> {
    let report = validate_network(net);
    if !report.is_valid() {
        return Err(EditError::InvalidNetwork(
            report.findings.iter().map(|f| f.to_string()).collect(),
        ));
    }
    let blocking: Vec<String> = net
        .pending()
        .iter()
        .filter(|p| Some(p.successor.as_str()) != resolving)
        .map(|p| p.successor.clone())
        .collect();
    if resolving.is_none() && !blocking.is_empty() {
        return Err(EditError::Pending(blocking));
    }
    Ok(())
}

pub(crate) fn check_fresh_labels(var_id: &str, existing: &[String], new: &[&str]) -> Result<(), EditError> {
    let mut seen: BTreeSet<&str> = existing.iter().map(String::as_str).collect();
    for label in new {
        if !seen.insert(label) {
            return Err(EditError::LabelCollision {
                node: var_id.to_string(),
                label: label.to_string(),
            });
        }
    }
    Ok(())
}

/// Validates the edited network, advances its label and assembles the
/// transaction.
pub(crate) fn finish(
    before: &Network,
    op: EditOp,
    mut after: Network,
    provenance: BTreeMap<String, Vec<RowSource>>,
    factors: Option<RescaleFactors>,
    notes: Vec<String>,
) -> Result<Transaction, EditError> {
    after.set_version_label(next_version_label(before.version_label()));
    let report = validate_network(&after);
    if !report.is_valid() {
        return Err(EditError::ResultInvalid(
            report.findings.iter().map(|f| f.to_string()).collect(),
        ));
    }
    let mut t = Transaction {
        before: before.clone(),
        op,
        after,
        report: AssessmentReport::default(),
        factors,
        provenance,
        notes,
    };
    t.report = audit_transaction(&t);
    Ok(t)
}
