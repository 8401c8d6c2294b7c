//! Edits with no probability-reusing special case: arc removal, outcome
//! removal and direct table replacement. Every affected table is supplied by
//! the caller.

use std::collections::BTreeMap;

use super::{begin, check_table, finish, EditError, EditOp, Frame, Mode, RowSource, Transaction};
use crate::network::{Network, NetworkError};

/// Removes `from -> to`; `rows` is `to`'s replacement table.
pub fn remove_arc(net: &Network, from: &str, to: &str, rows: &[Vec<f64>]) -> Result<Transaction, EditError> {
    begin(net, None)?;
    net.require(from)?;
    let to_var = net.require(to)?;
    if !net.has_arc(from, to) {
        return Err(EditError::ArcMissing {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    let parents: Vec<String> = net.parents(to).iter().filter(|p| *p != from).cloned().collect();
    let refs: Vec<&str> = parents.iter().map(String::as_str).collect();
    let frame = Frame::of_parents(net, &refs)?;
    check_table(to, &frame, rows, to_var.arity())?;

    let op = EditOp::RemoveArc {
        from: from.to_string(),
        to: to.to_string(),
        mode: Mode::General,
        rows: frame.labeled(rows),
    };
    let mut after = net.clone();
    after.set_parents(to, parents);
    after.set_rows(to, rows.to_vec());
    finish(
        net,
        op,
        after,
        BTreeMap::from([(to.to_string(), vec![RowSource::Elicited; rows.len()])]),
        None,
        Vec::new(),
    )
}

/// How the node losing an outcome gets its new table.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeRemoval {
    /// Fully re-elicited table, row order.
    Replace(Vec<Vec<f64>>),
    /// Drop the column and rescale each row to sum to 1. Not one of the
    /// reuse cases; the transaction notes it as such.
    Renormalize,
}

/// Removes `outcome` from `node`. Every direct successor needs a replacement
/// table in `successor_rows`.
pub fn remove_outcome(
    net: &Network,
    node: &str,
    outcome: &str,
    node_rows: OutcomeRemoval,
    successor_rows: &BTreeMap<String, Vec<Vec<f64>>>,
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    let var = net.require(node)?;
    let s = var.outcome_index(outcome).ok_or_else(|| {
        EditError::Network(NetworkError::UnknownOutcome {
            node: node.to_string(),
            outcome: outcome.to_string(),
        })
    })?;
    if var.arity() < 2 {
        return Err(EditError::LastOutcome(node.to_string()));
    }

    let children = net.children(node);
    let missing: Vec<String> = children
        .iter()
        .filter(|c| !successor_rows.contains_key(**c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EditError::MissingReplacement(missing));
    }
    if let Some(extra) = successor_rows.keys().find(|k| !children.contains(&k.as_str())) {
        return Err(EditError::UnexpectedReplacement(extra.clone()));
    }

    let mut after = net.clone();
    after.variable_mut(node).expect("checked").outcomes.remove(s);
    let frame = Frame::of(net, node)?;
    let mut notes = Vec::new();
    let mut provenance = BTreeMap::new();

    let (table, record_rows, renormalize) = match &node_rows {
        OutcomeRemoval::Replace(rows) => {
            check_table(node, &frame, rows, var.arity() - 1)?;
            provenance.insert(node.to_string(), vec![RowSource::Elicited; rows.len()]);
            (rows.clone(), Some(frame.labeled(rows)), false)
        }
        OutcomeRemoval::Renormalize => {
            let old = &net.cpt(node).expect("validated").rows;
            let mut table = Vec::with_capacity(old.len());
            for (cfg, row) in frame.configs().zip(old) {
                let kept: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != s)
                    .map(|(_, p)| *p)
                    .collect();
                let total: f64 = kept.iter().sum();
                if total <= 0.0 {
                    return Err(EditError::ZeroMass {
                        node: node.to_string(),
                        config: frame.describe(&cfg),
                    });
                }
                table.push(kept.into_iter().map(|p| p / total).collect());
            }
            notes.push(format!(
                "HEURISTIC: {node} renormalized after removing outcome {outcome}"
            ));
            provenance.insert(node.to_string(), vec![RowSource::Derived; table.len()]);
            (table, None, true)
        }
    };
    after.set_rows(node, table);

    let mut succ_record = BTreeMap::new();
    for (child, rows) in successor_rows {
        let frame = Frame::of(&after, child)?;
        check_table(child, &frame, rows, net.require(child)?.arity())?;
        succ_record.insert(child.clone(), frame.labeled(rows));
        provenance.insert(child.clone(), vec![RowSource::Elicited; rows.len()]);
        after.set_rows(child, rows.clone());
    }

    let op = EditOp::RemoveOutcome {
        node: node.to_string(),
        outcome: outcome.to_string(),
        mode: Mode::General,
        rows: record_rows,
        renormalize,
        successors: succ_record,
    };
    finish(net, op, after, provenance, None, notes)
}

/// Replaces `node`'s table. Also resolves a pending reassessment of `node`,
/// in which case `rows` follows the new outcome space of its parents.
pub fn replace_cpt(net: &Network, node: &str, rows: &[Vec<f64>]) -> Result<Transaction, EditError> {
    let resolving = net.pending_for(node).map(|_| node);
    begin(net, resolving)?;
    let var = net.require(node)?;
    let frame = Frame::of(net, node)?;
    check_table(node, &frame, rows, var.arity())?;
    let op = EditOp::ReplaceCpt {
        node: node.to_string(),
        mode: Mode::General,
        rows: frame.labeled(rows),
    };
    let mut after = net.clone();
    after.take_pending(node);
    after.set_rows(node, rows.to_vec());
    finish(
        net,
        op,
        after,
        BTreeMap::from([(node.to_string(), vec![RowSource::Elicited; rows.len()])]),
        None,
        Vec::new(),
    )
}
