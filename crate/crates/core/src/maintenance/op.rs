//! Edit records and change scripts.
//!
//! A change script is a JSON array of [`EditOp`] records. Elicited
//! probabilities are keyed by parent assignments written with outcome
//! labels, so a script stays meaningful if configurations are reordered:
//!
//! ```json
//! [{"op": "add_outcomes", "node": "A", "new_outcomes": ["a3"],
//!   "mode": "ignored_outcome",
//!   "rows": [{"given": {"P": "p1"}, "probs": [0.2]},
//!            {"given": {"P": "p2"}, "probs": [0.1]}]}]
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    add_arc_assumed_constant, add_arc_general, add_outcomes_general, add_outcomes_ignored, add_variable,
    remove_arc, remove_outcome, replace_cpt, reuse_successor_rows_ignored, reuse_successor_rows_split,
    split_outcome, split_outcome_general, EditError, Frame, OutcomeRemoval, SplitInput, SuccessorUpdate,
    Transaction,
};
use crate::network::{Network, Variable};

/// Elicitation mode of an edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Re-elicit every affected distribution.
    #[default]
    General,
    IgnoredOutcome,
    SplitOutcome,
    AssumedConstant,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general",
            Mode::IgnoredOutcome => "ignored_outcome",
            Mode::SplitOutcome => "split_outcome",
            Mode::AssumedConstant => "assumed_constant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    AddOutcomes,
    SplitOutcome,
    ReuseSuccessorRows,
    AddVariable,
    AddArc,
    RemoveArc,
    RemoveOutcome,
    ReplaceCpt,
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EditKind::AddOutcomes => "add_outcomes",
            EditKind::SplitOutcome => "split_outcome",
            EditKind::ReuseSuccessorRows => "reuse_successor_rows",
            EditKind::AddVariable => "add_variable",
            EditKind::AddArc => "add_arc",
            EditKind::RemoveArc => "remove_arc",
            EditKind::RemoveOutcome => "remove_outcome",
            EditKind::ReplaceCpt => "replace_cpt",
        })
    }
}

/// Probabilities for one parent configuration, named by outcome labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledRow {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub probs: Vec<f64>,
}

/// One structural change with its elicited inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum EditOp {
    /// `ignored_outcome`: `rows` give the new outcomes' probabilities per
    /// configuration of the node's parents. `general`: full new rows.
    AddOutcomes {
        node: String,
        new_outcomes: Vec<String>,
        mode: Mode,
        rows: Vec<LabeledRow>,
    },
    /// `split_outcome`: exactly one of `weights` / `probabilities`.
    /// `general`: full new rows in `rows`.
    SplitOutcome {
        node: String,
        outcome: String,
        parts: Vec<String>,
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<LabeledRow>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probabilities: Option<Vec<LabeledRow>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<LabeledRow>>,
    },
    /// Completes a successor left pending by an outcome change; `rows` cover
    /// only the configurations involving new outcomes of `changed_parent`.
    ReuseSuccessorRows {
        successor: String,
        changed_parent: String,
        mode: Mode,
        #[serde(default)]
        rows: Vec<LabeledRow>,
    },
    /// `rows` is the new variable's own table. `successors` maps each
    /// existing node gaining the variable as parent to its rows: full tables
    /// in `general` mode, non-baseline rows in `assumed_constant` mode.
    AddVariable {
        variable: Variable,
        #[serde(default)]
        parents: Vec<String>,
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        baseline: Option<String>,
        rows: Vec<LabeledRow>,
        #[serde(default)]
        successors: BTreeMap<String, Vec<LabeledRow>>,
    },
    AddArc {
        from: String,
        to: String,
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        baseline: Option<String>,
        #[serde(default)]
        rows: Vec<LabeledRow>,
    },
    RemoveArc {
        from: String,
        to: String,
        #[serde(default)]
        mode: Mode,
        rows: Vec<LabeledRow>,
    },
    /// Either `rows` for the node or `renormalize: true`; `successors`
    /// carries a replacement table for every direct successor.
    RemoveOutcome {
        node: String,
        outcome: String,
        #[serde(default)]
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<LabeledRow>>,
        #[serde(default)]
        renormalize: bool,
        #[serde(default)]
        successors: BTreeMap<String, Vec<LabeledRow>>,
    },
    ReplaceCpt {
        node: String,
        #[serde(default)]
        mode: Mode,
        rows: Vec<LabeledRow>,
    },
}

impl EditOp {
    pub fn kind(&self) -> EditKind {
        match self {
            EditOp::AddOutcomes { .. } => EditKind::AddOutcomes,
            EditOp::SplitOutcome { .. } => EditKind::SplitOutcome,
            EditOp::ReuseSuccessorRows { .. } => EditKind::ReuseSuccessorRows,
            EditOp::AddVariable { .. } => EditKind::AddVariable,
            EditOp::AddArc { .. } => EditKind::AddArc,
            EditOp::RemoveArc { .. } => EditKind::RemoveArc,
            EditOp::RemoveOutcome { .. } => EditKind::RemoveOutcome,
            EditOp::ReplaceCpt { .. } => EditKind::ReplaceCpt,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            EditOp::AddOutcomes { mode, .. }
            | EditOp::SplitOutcome { mode, .. }
            | EditOp::ReuseSuccessorRows { mode, .. }
            | EditOp::AddVariable { mode, .. }
            | EditOp::AddArc { mode, .. }
            | EditOp::RemoveArc { mode, .. }
            | EditOp::RemoveOutcome { mode, .. }
            | EditOp::ReplaceCpt { mode, .. } => *mode,
        }
    }

    /// Whether the mode is one this kind of edit can use.
    pub fn mode_is_legal(&self) -> bool {
        match (self.kind(), self.mode()) {
            (_, Mode::General) => self.kind() != EditKind::ReuseSuccessorRows,
            (EditKind::AddOutcomes, Mode::IgnoredOutcome) => true,
            (EditKind::SplitOutcome, Mode::SplitOutcome) => true,
            (EditKind::ReuseSuccessorRows, Mode::IgnoredOutcome | Mode::SplitOutcome) => true,
            (EditKind::AddArc | EditKind::AddVariable, Mode::AssumedConstant) => true,
            _ => false,
        }
    }
}

fn missing(what: &str) -> EditError {
    EditError::MissingInput(what.to_string())
}

/// Applies one labeled edit record.
pub fn apply_op(net: &Network, op: &EditOp) -> Result<Transaction, EditError> {
    if !op.mode_is_legal() {
        return Err(EditError::ModeNotAllowed {
            kind: op.kind(),
            mode: op.mode(),
        });
    }
    let mut t = match op {
        EditOp::AddOutcomes {
            node,
            new_outcomes,
            mode,
            rows,
        } => {
            let frame = Frame::of(net, node)?;
            let block = frame.resolve_full(node, rows)?;
            let labels: Vec<&str> = new_outcomes.iter().map(String::as_str).collect();
            match mode {
                Mode::IgnoredOutcome => add_outcomes_ignored(net, node, &labels, &block)?,
                _ => add_outcomes_general(net, node, &labels, &block)?,
            }
        }
        EditOp::SplitOutcome {
            node,
            outcome,
            parts,
            mode,
            weights,
            probabilities,
            rows,
        } => {
            let frame = Frame::of(net, node)?;
            let labels: Vec<&str> = parts.iter().map(String::as_str).collect();
            match (mode, weights, probabilities, rows) {
                (Mode::SplitOutcome, Some(w), None, None) => split_outcome(
                    net,
                    node,
                    outcome,
                    &labels,
                    SplitInput::Weights(frame.resolve_full(node, w)?),
                )?,
                (Mode::SplitOutcome, None, Some(p), None) => split_outcome(
                    net,
                    node,
                    outcome,
                    &labels,
                    SplitInput::Probabilities(frame.resolve_full(node, p)?),
                )?,
                (Mode::SplitOutcome, ..) => {
                    return Err(missing("split_outcome mode needs exactly one of `weights` or `probabilities`"))
                }
                (_, None, None, Some(r)) => {
                    split_outcome_general(net, node, outcome, &labels, &frame.resolve_full(node, r)?)?
                }
                _ => return Err(missing("general split needs `rows` only")),
            }
        }
        EditOp::ReuseSuccessorRows {
            successor,
            changed_parent,
            mode,
            rows,
        } => {
            let frame = Frame::of(net, successor)?;
            let block = frame.resolve_map(successor, rows)?;
            match mode {
                Mode::IgnoredOutcome => reuse_successor_rows_ignored(net, successor, changed_parent, &block)?,
                _ => reuse_successor_rows_split(net, successor, changed_parent, &block)?,
            }
        }
        EditOp::AddVariable {
            variable,
            parents,
            mode,
            baseline,
            rows,
            successors,
        } => {
            let parent_refs: Vec<&str> = parents.iter().map(String::as_str).collect();
            let own = Frame::of_parents(net, &parent_refs)?.resolve_full(&variable.id, rows)?;
            let update = if successors.is_empty() && baseline.is_none() {
                SuccessorUpdate::None
            } else {
                let mut general = BTreeMap::new();
                let mut constant = BTreeMap::new();
                for (s, block) in successors {
                    let frame = Frame::of(net, s)?.with_parent(&variable.id, &variable.outcomes);
                    match mode {
                        Mode::AssumedConstant => {
                            constant.insert(s.clone(), frame.resolve_map(s, block)?);
                        }
                        _ => {
                            general.insert(s.clone(), frame.resolve_full(s, block)?);
                        }
                    }
                }
                match mode {
                    Mode::AssumedConstant => SuccessorUpdate::AssumedConstant {
                        baseline: baseline
                            .clone()
                            .ok_or_else(|| missing("assumed_constant mode needs `baseline`"))?,
                        rows: constant,
                    },
                    _ => SuccessorUpdate::General(general),
                }
            };
            add_variable(net, variable.clone(), &parent_refs, &own, update)?
        }
        EditOp::AddArc {
            from,
            to,
            mode,
            baseline,
            rows,
        } => {
            let from_var = net.require(from)?;
            let frame = Frame::of(net, to)?.with_parent(from, &from_var.outcomes);
            match mode {
                Mode::AssumedConstant => {
                    let base = baseline
                        .as_deref()
                        .ok_or_else(|| missing("assumed_constant mode needs `baseline`"))?;
                    add_arc_assumed_constant(net, from, to, base, &frame.resolve_map(to, rows)?)?
                }
                _ => add_arc_general(net, from, to, &frame.resolve_full(to, rows)?)?,
            }
        }
        EditOp::RemoveArc { from, to, rows, .. } => {
            let parents: Vec<&str> = net.parents(to).iter().map(String::as_str).filter(|p| p != from).collect();
            let frame = Frame::of_parents(net, &parents)?;
            remove_arc(net, from, to, &frame.resolve_full(to, rows)?)?
        }
        EditOp::RemoveOutcome {
            node,
            outcome,
            rows,
            renormalize,
            successors,
            ..
        } => {
            let node_rows = match (rows, renormalize) {
                (Some(r), false) => OutcomeRemoval::Replace(Frame::of(net, node)?.resolve_full(node, r)?),
                (None, true) => OutcomeRemoval::Renormalize,
                _ => return Err(missing("remove_outcome needs either `rows` or `renormalize: true`")),
            };
            // successor tables are keyed by the reduced outcome space
            let mut reduced = net.clone();
            if let Some(v) = reduced.variable_mut(node) {
                v.outcomes.retain(|o| o != outcome);
            }
            let mut tables = BTreeMap::new();
            for (s, block) in successors {
                tables.insert(s.clone(), Frame::of(&reduced, s)?.resolve_full(s, block)?);
            }
            remove_outcome(net, node, outcome, node_rows, &tables)?
        }
        EditOp::ReplaceCpt { node, rows, .. } => {
            replace_cpt(net, node, &Frame::of(net, node)?.resolve_full(node, rows)?)?
        }
    };
    t.op = op.clone();
    Ok(t)
}

pub fn parse_script(text: &str) -> Result<Vec<EditOp>, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("op {index}: {source}")]
pub struct ScriptError {
    /// 1-based position of the failing op.
    pub index: usize,
    pub source: EditError,
}

/// Applies `ops` in order, each to the previous result. All-or-nothing: on
/// failure nothing of the partial sequence is returned.
pub fn apply_script(net: &Network, ops: &[EditOp]) -> Result<Vec<Transaction>, ScriptError> {
    let mut out: Vec<Transaction> = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        let current = out.last().map(|t| &t.after).unwrap_or(net);
        let t = apply_op(current, op).map_err(|source| ScriptError { index: i + 1, source })?;
        out.push(t);
    }
    Ok(out)
}
