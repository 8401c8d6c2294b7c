//! Outcome-space growth: ignored outcomes, split outcomes, and row reuse for
//! the successors of a node whose outcome space grew.

use std::collections::BTreeMap;

use super::{
    begin, check_distribution, check_fresh_labels, check_table, finish, EditError, EditOp, Frame, Mode,
    RescaleFactors, RowSource, Transaction,
};
use crate::network::{config_index, Network, ParentConfig, Pending, PendingKind, EPSILON};

/// Appends `new_outcomes` to `node` under the ignored-outcome assumption.
///
/// `new_probs[j]` holds `P(new outcome | C_j)` for each new outcome, for every
/// parent configuration in row order. Each old entry is multiplied by
/// `λ_j = 1 - Σ new_probs[j]`.
pub fn add_outcomes_ignored(
    net: &Network,
    node: &str,
    new_outcomes: &[&str],
    new_probs: &[Vec<f64>],
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    let var = net.require(node)?;
    check_fresh_labels(node, &var.outcomes, new_outcomes)?;
    let frame = Frame::of(net, node)?;
    let expected = frame.count()?;
    if new_probs.len() != expected {
        return Err(EditError::ConfigCount {
            node: node.to_string(),
            expected,
            found: new_probs.len(),
        });
    }
    let old = &net.cpt(node).expect("validated").rows;
    let k = new_outcomes.len();

    let mut rows = Vec::with_capacity(expected);
    let mut lambdas = Vec::with_capacity(expected);
    for ((cfg, block), old_row) in frame.configs().zip(new_probs).zip(old) {
        let describe = || frame.describe(&cfg);
        if block.len() != k {
            return Err(EditError::BadRow {
                node: node.to_string(),
                config: describe(),
                reason: format!("{} probabilities for {k} new outcomes", block.len()),
            });
        }
        if let Some(x) = block.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(EditError::BadRow {
                node: node.to_string(),
                config: describe(),
                reason: format!("entry {x} outside [0, 1]"),
            });
        }
        let mass: f64 = block.iter().sum();
        if mass > 1.0 + EPSILON {
            return Err(EditError::MassExceeded {
                node: node.to_string(),
                config: describe(),
                mass,
            });
        }
        let lambda = (1.0 - mass).max(0.0);
        let mut row: Vec<f64> = old_row.iter().map(|p| lambda * p).collect();
        row.extend_from_slice(block);
        rows.push(row);
        lambdas.push(lambda);
    }

    let op = EditOp::AddOutcomes {
        node: node.to_string(),
        new_outcomes: new_outcomes.iter().map(|s| s.to_string()).collect(),
        mode: Mode::IgnoredOutcome,
        rows: frame.labeled(new_probs),
    };
    let provenance = vec![RowSource::Rescaled { new_entries: k }; rows.len()];
    let after = grow_outcomes(net, node, new_outcomes, rows);
    finish(
        net,
        op,
        after,
        BTreeMap::from([(node.to_string(), provenance)]),
        Some(RescaleFactors::Ignored { lambdas }),
        Vec::new(),
    )
}

/// Appends `new_outcomes` to `node` with a fully re-elicited table.
pub fn add_outcomes_general(
    net: &Network,
    node: &str,
    new_outcomes: &[&str],
    rows: &[Vec<f64>],
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    let var = net.require(node)?;
    check_fresh_labels(node, &var.outcomes, new_outcomes)?;
    let frame = Frame::of(net, node)?;
    check_table(node, &frame, rows, var.arity() + new_outcomes.len())?;
    let op = EditOp::AddOutcomes {
        node: node.to_string(),
        new_outcomes: new_outcomes.iter().map(|s| s.to_string()).collect(),
        mode: Mode::General,
        rows: frame.labeled(rows),
    };
    let after = grow_outcomes(net, node, new_outcomes, rows.to_vec());
    finish(
        net,
        op,
        after,
        BTreeMap::from([(node.to_string(), vec![RowSource::Elicited; rows.len()])]),
        None,
        Vec::new(),
    )
}

fn grow_outcomes(net: &Network, node: &str, new_outcomes: &[&str], rows: Vec<Vec<f64>>) -> Network {
    let m = net.variable(node).expect("checked").arity();
    let mut after = net.clone();
    after
        .variable_mut(node)
        .expect("checked")
        .outcomes
        .extend(new_outcomes.iter().map(|s| s.to_string()));
    after.set_rows(node, rows);
    let carried: Vec<Option<usize>> = (0..m).map(Some).chain(new_outcomes.iter().map(|_| None)).collect();
    mark_successors(&mut after, net, node, PendingKind::IgnoredOutcome, carried, m);
    after
}

fn mark_successors(
    after: &mut Network,
    before: &Network,
    node: &str,
    kind: PendingKind,
    carried: Vec<Option<usize>>,
    old_radix: usize,
) {
    for child in before.children(node) {
        after.push_pending(Pending {
            successor: child.to_string(),
            changed_parent: node.to_string(),
            kind,
            carried: carried.clone(),
            old_radix,
        });
    }
}

/// How the expert supplies the split of one outcome, per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitInput {
    /// Shares of the old outcome's probability, summing to 1.
    Weights(Vec<Vec<f64>>),
    /// Probabilities of the parts, summing to the old outcome's probability.
    Probabilities(Vec<Vec<f64>>),
}

/// Replaces outcome `split_label` of `node` by `parts`, in place. Every other
/// entry is kept as is; part `i` gets `λ_ij · P(split_label | C_j)`.
pub fn split_outcome(
    net: &Network,
    node: &str,
    split_label: &str,
    parts: &[&str],
    input: SplitInput,
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    let (s, frame) = split_preamble(net, node, split_label, parts)?;
    let expected = frame.count()?;
    let block = match &input {
        SplitInput::Weights(b) | SplitInput::Probabilities(b) => b,
    };
    if block.len() != expected {
        return Err(EditError::ConfigCount {
            node: node.to_string(),
            expected,
            found: block.len(),
        });
    }
    let k = parts.len();
    let old = &net.cpt(node).expect("validated").rows;

    let mut rows = Vec::with_capacity(expected);
    let mut weights_all = Vec::with_capacity(expected);
    for ((cfg, given), old_row) in frame.configs().zip(block).zip(old) {
        let describe = || frame.describe(&cfg);
        if given.len() != k {
            return Err(EditError::BadRow {
                node: node.to_string(),
                config: describe(),
                reason: format!("{} values for {k} parts", given.len()),
            });
        }
        if let Some(x) = given.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(EditError::BadRow {
                node: node.to_string(),
                config: describe(),
                reason: format!("entry {x} outside [0, 1]"),
            });
        }
        let old_value = old_row[s];
        let sum: f64 = given.iter().sum();
        let weights: Vec<f64> = match input {
            SplitInput::Weights(_) => {
                if (sum - 1.0).abs() > EPSILON {
                    return Err(EditError::WeightsSum {
                        node: node.to_string(),
                        config: describe(),
                        sum,
                    });
                }
                given.clone()
            }
            SplitInput::Probabilities(_) => {
                if (sum - old_value).abs() > EPSILON {
                    return Err(EditError::SplitMass {
                        node: node.to_string(),
                        config: describe(),
                        expected: old_value,
                        found: sum,
                    });
                }
                if old_value > 0.0 {
                    given.iter().map(|p| p / old_value).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            }
        };
        let mut row = Vec::with_capacity(old_row.len() + k - 1);
        row.extend_from_slice(&old_row[..s]);
        row.extend(weights.iter().map(|w| w * old_value));
        row.extend_from_slice(&old_row[s + 1..]);
        rows.push(row);
        weights_all.push(weights);
    }

    let (weights_rows, prob_rows) = match &input {
        SplitInput::Weights(b) => (Some(frame.labeled(b)), None),
        SplitInput::Probabilities(b) => (None, Some(frame.labeled(b))),
    };
    let op = EditOp::SplitOutcome {
        node: node.to_string(),
        outcome: split_label.to_string(),
        parts: parts.iter().map(|s| s.to_string()).collect(),
        mode: Mode::SplitOutcome,
        weights: weights_rows,
        probabilities: prob_rows,
        rows: None,
    };
    let provenance = vec![RowSource::Split { parts: k }; rows.len()];
    let after = apply_split(net, node, s, parts, rows);
    finish(
        net,
        op,
        after,
        BTreeMap::from([(node.to_string(), provenance)]),
        Some(RescaleFactors::Split { weights: weights_all }),
        Vec::new(),
    )
}

/// Splits an outcome with a fully re-elicited table for `node`.
pub fn split_outcome_general(
    net: &Network,
    node: &str,
    split_label: &str,
    parts: &[&str],
    rows: &[Vec<f64>],
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    let (s, frame) = split_preamble(net, node, split_label, parts)?;
    let arity = net.require(node)?.arity() + parts.len() - 1;
    check_table(node, &frame, rows, arity)?;
    let op = EditOp::SplitOutcome {
        node: node.to_string(),
        outcome: split_label.to_string(),
        parts: parts.iter().map(|s| s.to_string()).collect(),
        mode: Mode::General,
        weights: None,
        probabilities: None,
        rows: Some(frame.labeled(rows)),
    };
    let after = apply_split(net, node, s, parts, rows.to_vec());
    finish(
        net,
        op,
        after,
        BTreeMap::from([(node.to_string(), vec![RowSource::Elicited; rows.len()])]),
        None,
        Vec::new(),
    )
}

fn split_preamble(
    net: &Network,
    node: &str,
    split_label: &str,
    parts: &[&str],
) -> Result<(usize, Frame), EditError> {
    let var = net.require(node)?;
    let s = var.outcome_index(split_label).ok_or_else(|| {
        EditError::Network(crate::network::NetworkError::UnknownOutcome {
            node: node.to_string(),
            outcome: split_label.to_string(),
        })
    })?;
    if parts.is_empty() {
        return Err(EditError::MissingInput(format!(
            "split of {node}={split_label} needs at least one part"
        )));
    }
    let others: Vec<String> = var
        .outcomes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != s)
        .map(|(_, o)| o.clone())
        .collect();
    check_fresh_labels(node, &others, parts)?;
    Ok((s, Frame::of(net, node)?))
}

fn apply_split(net: &Network, node: &str, s: usize, parts: &[&str], rows: Vec<Vec<f64>>) -> Network {
    let m = net.variable(node).expect("checked").arity();
    let k = parts.len();
    let mut after = net.clone();
    let var = after.variable_mut(node).expect("checked");
    var.outcomes
        .splice(s..=s, parts.iter().map(|p| p.to_string()));
    after.set_rows(node, rows);
    // a one-part split is a relabel: the part still stands for the old outcome
    let carried: Vec<Option<usize>> = (0..s)
        .map(Some)
        .chain((0..k).map(|_| if k == 1 { Some(s) } else { None }))
        .chain((s + 1..m).map(Some))
        .collect();
    mark_successors(&mut after, net, node, PendingKind::SplitOutcome, carried, m);
    after
}

/// Completes a successor of a node that gained outcomes: rows conditioned on
/// old outcomes of `changed_parent` are copied, rows conditioned on the new
/// outcomes come from `rows` (keyed by the successor's full parent
/// configuration under the new outcome space).
pub fn reuse_successor_rows_ignored(
    net: &Network,
    successor: &str,
    changed_parent: &str,
    rows: &BTreeMap<ParentConfig, Vec<f64>>,
) -> Result<Transaction, EditError> {
    reuse_successor_rows(net, successor, changed_parent, rows, PendingKind::IgnoredOutcome)
}

/// Same as [`reuse_successor_rows_ignored`] after a split: only rows
/// conditioned on the parts are elicited.
pub fn reuse_successor_rows_split(
    net: &Network,
    successor: &str,
    changed_parent: &str,
    rows: &BTreeMap<ParentConfig, Vec<f64>>,
) -> Result<Transaction, EditError> {
    reuse_successor_rows(net, successor, changed_parent, rows, PendingKind::SplitOutcome)
}

fn kind_name(kind: PendingKind) -> &'static str {
    match kind {
        PendingKind::IgnoredOutcome => "ignored-outcome",
        PendingKind::SplitOutcome => "split-outcome",
    }
}

fn reuse_successor_rows(
    net: &Network,
    successor: &str,
    changed_parent: &str,
    rows: &BTreeMap<ParentConfig, Vec<f64>>,
    kind: PendingKind,
) -> Result<Transaction, EditError> {
    begin(net, Some(successor))?;
    net.require(successor)?;
    net.require(changed_parent)?;
    let pending = net
        .pending_for(successor)
        .filter(|p| p.changed_parent == changed_parent)
        .ok_or_else(|| EditError::NotPending {
            successor: successor.to_string(),
            parent: changed_parent.to_string(),
        })?;
    if pending.kind != kind {
        return Err(EditError::PendingKindMismatch {
            successor: successor.to_string(),
            expected: kind_name(pending.kind),
            found: kind_name(kind),
        });
    }

    let frame = Frame::of(net, successor)?;
    let radices = frame.radices();
    let old_radices = net.table_radices(successor)?;
    let pos = frame.position(changed_parent).expect("pending implies arc");
    let arity = net.require(successor)?.arity();
    let old_rows = &net.cpt(successor).expect("validated").rows;

    for cfg in rows.keys() {
        if !cfg.is_valid_for(&radices) {
            return Err(EditError::UnexpectedRow {
                node: successor.to_string(),
                config: cfg.to_string(),
            });
        }
    }

    let mut new_rows = Vec::new();
    let mut provenance = Vec::new();
    for cfg in frame.configs() {
        match pending.carried[cfg.as_slice()[pos]] {
            Some(old_outcome) => {
                if rows.contains_key(&cfg) {
                    return Err(EditError::UnexpectedRow {
                        node: successor.to_string(),
                        config: frame.describe(&cfg),
                    });
                }
                let mut old_cfg = cfg.clone().into_inner();
                old_cfg[pos] = old_outcome;
                let j = config_index(&ParentConfig::new(old_cfg), &old_radices)?;
                new_rows.push(old_rows[j].clone());
                provenance.push(RowSource::Copied);
            }
            None => {
                let row = rows.get(&cfg).ok_or_else(|| EditError::MissingRow {
                    node: successor.to_string(),
                    config: frame.describe(&cfg),
                })?;
                check_distribution(successor, || frame.describe(&cfg), row, arity)?;
                new_rows.push(row.clone());
                provenance.push(RowSource::Elicited);
            }
        }
    }

    let op = EditOp::ReuseSuccessorRows {
        successor: successor.to_string(),
        changed_parent: changed_parent.to_string(),
        mode: match kind {
            PendingKind::IgnoredOutcome => Mode::IgnoredOutcome,
            PendingKind::SplitOutcome => Mode::SplitOutcome,
        },
        rows: frame.labeled_map(rows),
    };
    let mut after = net.clone();
    after.take_pending(successor);
    after.set_rows(successor, new_rows);
    finish(
        net,
        op,
        after,
        BTreeMap::from([(successor.to_string(), provenance)]),
        None,
        Vec::new(),
    )
}
