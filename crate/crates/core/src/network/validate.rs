use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{config_count, Network, EPSILON};

/// One violated network invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    DuplicateVariable { id: String },
    EmptyOutcomes { node: String },
    DuplicateOutcome { node: String, label: String },
    UnknownParent { node: String, parent: String },
    DuplicateParent { node: String, parent: String },
    UnknownEntry { id: String },
    Cycle { nodes: Vec<String> },
    MissingCpt { node: String },
    RowCount { node: String, expected: usize, found: usize },
    RowLength { node: String, row: usize, expected: usize, found: usize },
    EntryRange { node: String, row: usize, column: usize, value: f64 },
    RowSum { node: String, row: usize, sum: f64 },
}

impl Finding {
    /// The node the finding is about, when there is a single one.
    pub fn node(&self) -> Option<&str> {
        match self {
            Finding::DuplicateVariable { id } | Finding::UnknownEntry { id } => Some(id),
            Finding::Cycle { .. } => None,
            Finding::EmptyOutcomes { node }
            | Finding::DuplicateOutcome { node, .. }
            | Finding::UnknownParent { node, .. }
            | Finding::DuplicateParent { node, .. }
            | Finding::MissingCpt { node }
            | Finding::RowCount { node, .. }
            | Finding::RowLength { node, .. }
            | Finding::EntryRange { node, .. }
            | Finding::RowSum { node, .. } => Some(node),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateVariable { id } => write!(f, "variable {id} declared more than once"),
            Finding::EmptyOutcomes { node } => write!(f, "node {node} has no outcomes"),
            Finding::DuplicateOutcome { node, label } => {
                write!(f, "node {node} repeats outcome {label}")
            }
            Finding::UnknownParent { node, parent } => {
                write!(f, "node {node} has undeclared parent {parent}")
            }
            Finding::DuplicateParent { node, parent } => {
                write!(f, "node {node} lists parent {parent} more than once")
            }
            Finding::UnknownEntry { id } => {
                write!(f, "parents/cpts entry {id} does not name a declared variable")
            }
            Finding::Cycle { nodes } => write!(f, "cycle {}", nodes.join(",")),
            Finding::MissingCpt { node } => write!(f, "node {node} has no cpt"),
            Finding::RowCount { node, expected, found } => {
                write!(f, "node {node} has {found} rows, expected {expected}")
            }
            Finding::RowLength { node, row, expected, found } => {
                write!(f, "row {row} of node {node} has {found} entries, expected {expected}")
            }
            Finding::EntryRange { node, row, column, value } => {
                write!(f, "row {row} of node {node} has entry {column} = {value} outside [0, 1]")
            }
            Finding::RowSum { node, row, sum } => write!(f, "row {row} of node {node} sums to {sum}"),
        }
    }
}

/// Result of [`validate_network`]. Empty findings means every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn validate_network(net: &Network) -> ValidationReport {
    validate_with_tolerance(net, EPSILON)
}

/// Validation with a custom row-sum tolerance.
pub fn validate_with_tolerance(net: &Network, tolerance: f64) -> ValidationReport {
    let mut findings = Vec::new();

    let mut ids = BTreeSet::new();
    for v in net.variables() {
        if !ids.insert(v.id.as_str()) {
            findings.push(Finding::DuplicateVariable { id: v.id.clone() });
        }
        if v.outcomes.is_empty() {
            findings.push(Finding::EmptyOutcomes { node: v.id.clone() });
        }
        let mut labels = BTreeSet::new();
        for o in &v.outcomes {
            if !labels.insert(o.as_str()) {
                findings.push(Finding::DuplicateOutcome {
                    node: v.id.clone(),
                    label: o.clone(),
                });
            }
        }
    }

    let unknown: BTreeSet<&str> = net
        .parent_map()
        .keys()
        .chain(net.cpts().keys())
        .map(String::as_str)
        .filter(|id| !ids.contains(id))
        .collect();
    for id in unknown {
        findings.push(Finding::UnknownEntry { id: id.to_string() });
    }

    let mut structurally_sound = true;
    for v in net.variables() {
        let mut seen = BTreeSet::new();
        for p in net.parents(&v.id) {
            if !ids.contains(p.as_str()) {
                structurally_sound = false;
                findings.push(Finding::UnknownParent {
                    node: v.id.clone(),
                    parent: p.clone(),
                });
            }
            if !seen.insert(p.as_str()) {
                findings.push(Finding::DuplicateParent {
                    node: v.id.clone(),
                    parent: p.clone(),
                });
            }
        }
    }

    for cycle in find_cycles(net) {
        findings.push(Finding::Cycle { nodes: cycle });
    }

    if structurally_sound {
        for v in net.variables() {
            check_table(net, &v.id, tolerance, &mut findings);
        }
    }

    ValidationReport { findings }
}

fn check_table(net: &Network, id: &str, tolerance: f64, findings: &mut Vec<Finding>) {
    let Some(cpt) = net.cpt(id) else {
        findings.push(Finding::MissingCpt { node: id.to_string() });
        return;
    };
    let arity = net.variable(id).map(|v| v.arity()).unwrap_or(0);
    let Ok(radices) = net.table_radices(id) else {
        return;
    };
    let expected = match config_count(&radices) {
        Ok(n) => n,
        Err(_) => {
            findings.push(Finding::RowCount {
                node: id.to_string(),
                expected: usize::MAX,
                found: cpt.rows.len(),
            });
            return;
        }
    };
    if cpt.rows.len() != expected {
        findings.push(Finding::RowCount {
            node: id.to_string(),
            expected,
            found: cpt.rows.len(),
        });
    }
    for (r, row) in cpt.rows.iter().enumerate() {
        if row.len() != arity {
            findings.push(Finding::RowLength {
                node: id.to_string(),
                row: r,
                expected: arity,
                found: row.len(),
            });
            continue;
        }
        for (c, &value) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                findings.push(Finding::EntryRange {
                    node: id.to_string(),
                    row: r,
                    column: c,
                    value,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= tolerance) {
            findings.push(Finding::RowSum {
                node: id.to_string(),
                row: r,
                sum,
            });
        }
    }
}

/// Reports each cycle reached by a depth-first walk in declaration order,
/// listing its nodes starting from the first one entered.
fn find_cycles(net: &Network) -> Vec<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for v in net.variables() {
        for p in net.parents(&v.id) {
            children.entry(p.as_str()).or_default().push(v.id.as_str());
        }
    }

    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    let mut cycles = Vec::new();
    for root in net.variables() {
        if marks.contains_key(root.id.as_str()) {
            continue;
        }
        // iterative DFS: (node, next child position)
        let mut stack: Vec<(&str, usize)> = vec![(root.id.as_str(), 0)];
        marks.insert(root.id.as_str(), Mark::Open);
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            let kids = children.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(&child) = kids.get(*pos) {
                *pos += 1;
                match marks.get(child) {
                    None => {
                        marks.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                        cycles.push(stack[start..].iter().map(|(n, _)| n.to_string()).collect());
                    }
                    Some(Mark::Done) => {}
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    cycles
}
