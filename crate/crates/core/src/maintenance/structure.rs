//! New conditioning: added arcs and added variables.

use std::collections::BTreeMap;

use super::{
    begin, check_distribution, check_table, finish, EditError, EditOp, Frame, LabeledRow, Mode, RowSource,
    Transaction,
};
use crate::network::{config_index, Network, NetworkError, ParentConfig, Variable};

/// Adds `from -> to` under the assumed-constant case: `to`'s old table
/// becomes the block for `from = baseline`, and only the rows for `from`'s
/// other outcomes are elicited. `from` is appended to `to`'s parent list,
/// so `rows` is keyed by configurations of the extended list.
pub fn add_arc_assumed_constant(
    net: &Network,
    from: &str,
    to: &str,
    baseline: &str,
    rows: &BTreeMap<ParentConfig, Vec<f64>>,
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    check_new_arc(net, from, to)?;
    let from_var = net.require(from)?;
    let base = baseline_index(from_var, baseline)?;
    let (frame, table, provenance) = constant_extension(net, to, from_var, base, rows)?;
    let op = EditOp::AddArc {
        from: from.to_string(),
        to: to.to_string(),
        mode: Mode::AssumedConstant,
        baseline: Some(baseline.to_string()),
        rows: frame.labeled_map(rows),
    };
    let mut after = net.clone();
    let mut parents = net.parents(to).to_vec();
    parents.push(from.to_string());
    after.set_parents(to, parents);
    after.set_rows(to, table);
    finish(
        net,
        op,
        after,
        BTreeMap::from([(to.to_string(), provenance)]),
        None,
        Vec::new(),
    )
}

/// Adds `from -> to` with a fully re-elicited table for `to`.
pub fn add_arc_general(net: &Network, from: &str, to: &str, rows: &[Vec<f64>]) -> Result<Transaction, EditError> {
    begin(net, None)?;
    check_new_arc(net, from, to)?;
    let from_var = net.require(from)?;
    let frame = Frame::of(net, to)?.with_parent(from, &from_var.outcomes);
    check_table(to, &frame, rows, net.require(to)?.arity())?;
    let op = EditOp::AddArc {
        from: from.to_string(),
        to: to.to_string(),
        mode: Mode::General,
        baseline: None,
        rows: frame.labeled(rows),
    };
    let mut after = net.clone();
    let mut parents = net.parents(to).to_vec();
    parents.push(from.to_string());
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

/// What happens to the existing nodes that gain a newly added variable as a
/// predecessor.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SuccessorUpdate {
    /// No existing node is conditioned on the new variable.
    #[default]
    None,
    /// Each listed successor gets a fully elicited table (row order of its
    /// extended parent list).
    General(BTreeMap<String, Vec<Vec<f64>>>),
    /// Each listed successor keeps its old table for `baseline` and gets the
    /// supplied rows for the other outcomes.
    AssumedConstant {
        baseline: String,
        rows: BTreeMap<String, BTreeMap<ParentConfig, Vec<f64>>>,
    },
}

/// Adds `var` with the given parents. Its own table (`own_rows`, row order)
/// is always fully elicited; successors are handled per `successors`.
pub fn add_variable(
    net: &Network,
    var: Variable,
    parents: &[&str],
    own_rows: &[Vec<f64>],
    successors: SuccessorUpdate,
) -> Result<Transaction, EditError> {
    begin(net, None)?;
    if net.contains(&var.id) {
        return Err(EditError::DuplicateVariable(var.id.clone()));
    }
    let mut labels = std::collections::BTreeSet::new();
    if var.outcomes.is_empty() || !var.outcomes.iter().all(|o| labels.insert(o.as_str())) {
        return Err(EditError::BadVariable(var.id.clone()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for p in parents {
        net.require(p)?;
        if !seen.insert(*p) {
            return Err(EditError::BadAssignment {
                node: var.id.clone(),
                reason: format!("parent {p} listed twice"),
            });
        }
    }

    let successor_ids: Vec<&String> = match &successors {
        SuccessorUpdate::None => Vec::new(),
        SuccessorUpdate::General(m) => m.keys().collect(),
        SuccessorUpdate::AssumedConstant { rows, .. } => rows.keys().collect(),
    };
    for s in &successor_ids {
        net.require(s)?;
        // s must not be an ancestor of the new variable
        if parents.iter().any(|p| net.reaches(s, p)) {
            return Err(EditError::Cycle {
                from: var.id.clone(),
                to: s.to_string(),
            });
        }
    }

    let own_frame = Frame::of_parents(net, parents)?;
    check_table(&var.id, &own_frame, own_rows, var.arity())?;

    let mut after = net.clone();
    let mut provenance = BTreeMap::new();
    let mut succ_record: BTreeMap<String, Vec<LabeledRow>> = BTreeMap::new();
    let mut mode = Mode::General;
    let mut baseline_label = None;

    match &successors {
        SuccessorUpdate::None => {}
        SuccessorUpdate::General(tables) => {
            for (s, rows) in tables {
                let frame = Frame::of(net, s)?.with_parent(&var.id, &var.outcomes);
                check_table(s, &frame, rows, net.require(s)?.arity())?;
                succ_record.insert(s.clone(), frame.labeled(rows));
                provenance.insert(s.clone(), vec![RowSource::Elicited; rows.len()]);
                let mut ps = net.parents(s).to_vec();
                ps.push(var.id.clone());
                after.set_parents(s, ps);
                after.set_rows(s, rows.clone());
            }
        }
        SuccessorUpdate::AssumedConstant { baseline, rows } => {
            mode = Mode::AssumedConstant;
            baseline_label = Some(baseline.clone());
            let base = baseline_index(&var, baseline)?;
            for (s, block) in rows {
                let (frame, table, prov) = constant_extension(net, s, &var, base, block)?;
                succ_record.insert(s.clone(), frame.labeled_map(block));
                provenance.insert(s.clone(), prov);
                let mut ps = net.parents(s).to_vec();
                ps.push(var.id.clone());
                after.set_parents(s, ps);
                after.set_rows(s, table);
            }
        }
    }

    let op = EditOp::AddVariable {
        variable: var.clone(),
        parents: parents.iter().map(|s| s.to_string()).collect(),
        mode,
        baseline: baseline_label,
        rows: own_frame.labeled(own_rows),
        successors: succ_record,
    };
    provenance.insert(var.id.clone(), vec![RowSource::Elicited; own_rows.len()]);
    let id = var.id.clone();
    after.push_variable(var);
    after.set_parents(&id, parents.iter().map(|s| s.to_string()).collect());
    after.set_rows(&id, own_rows.to_vec());
    finish(net, op, after, provenance, None, Vec::new())
}

impl Frame {
    pub(crate) fn of_parents(net: &Network, parents: &[&str]) -> Result<Frame, EditError> {
        let parents = parents
            .iter()
            .map(|p| Ok((p.to_string(), net.require(p)?.outcomes.clone())))
            .collect::<Result<_, NetworkError>>()?;
        Ok(Frame { parents })
    }
}

fn check_new_arc(net: &Network, from: &str, to: &str) -> Result<(), EditError> {
    net.require(from)?;
    net.require(to)?;
    if net.has_arc(from, to) {
        return Err(EditError::ArcExists {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    if from == to || net.reaches(to, from) {
        return Err(EditError::Cycle {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    Ok(())
}

fn baseline_index(var: &Variable, baseline: &str) -> Result<usize, EditError> {
    var.outcome_index(baseline).ok_or_else(|| {
        EditError::Network(NetworkError::UnknownOutcome {
            node: var.id.clone(),
            outcome: baseline.to_string(),
        })
    })
}

/// Builds `to`'s table with `new_parent` appended: baseline rows copied from
/// the old table, the rest taken from `rows`.
fn constant_extension(
    net: &Network,
    to: &str,
    new_parent: &Variable,
    base: usize,
    rows: &BTreeMap<ParentConfig, Vec<f64>>,
) -> Result<(Frame, Vec<Vec<f64>>, Vec<RowSource>), EditError> {
    let old_frame = Frame::of(net, to)?;
    let old_radices = old_frame.radices();
    let frame = old_frame.with_parent(&new_parent.id, &new_parent.outcomes);
    let radices = frame.radices();
    let arity = net.require(to)?.arity();
    let old_rows = &net.cpt(to).expect("validated").rows;
    let last = radices.len() - 1;

    for cfg in rows.keys() {
        if !cfg.is_valid_for(&radices) || cfg.as_slice()[last] == base {
            return Err(EditError::UnexpectedRow {
                node: to.to_string(),
                config: if cfg.is_valid_for(&radices) {
                    frame.describe(cfg)
                } else {
                    cfg.to_string()
                },
            });
        }
    }

    let mut table = Vec::new();
    let mut provenance = Vec::new();
    for cfg in frame.configs() {
        if cfg.as_slice()[last] == base {
            let rest = ParentConfig::new(cfg.as_slice()[..last].to_vec());
            table.push(old_rows[config_index(&rest, &old_radices)?].clone());
            provenance.push(RowSource::Copied);
        } else {
            let row = rows.get(&cfg).ok_or_else(|| EditError::MissingRow {
                node: to.to_string(),
                config: frame.describe(&cfg),
            })?;
            check_distribution(to, || frame.describe(&cfg), row, arity)?;
            table.push(row.clone());
            provenance.push(RowSource::Elicited);
        }
    }
    Ok((frame, table, provenance))
}
