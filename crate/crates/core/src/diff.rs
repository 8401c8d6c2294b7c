//! Structural and numeric differences between two networks.
//!
//! CPT cells are matched by labels (parent assignment and outcome), so a
//! table whose node gained an outcome still has its surviving cells compared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::maintenance::Frame;
use crate::network::{Network, EPSILON};

#[derive(Debug, Clone, PartialEq)]
pub struct CellChange {
    pub node: String,
    pub given: String,
    pub outcome: String,
    pub old: f64,
    pub new: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkDiff {
    pub version_label: Option<(String, String)>,
    pub variables_added: Vec<String>,
    pub variables_removed: Vec<String>,
    /// `(variable, outcome)` pairs.
    pub outcomes_added: Vec<(String, String)>,
    pub outcomes_removed: Vec<(String, String)>,
    pub outcomes_reordered: Vec<String>,
    /// `(from, to)` pairs.
    pub arcs_added: Vec<(String, String)>,
    pub arcs_removed: Vec<(String, String)>,
    pub parents_reordered: Vec<String>,
    pub cells: Vec<CellChange>,
}

impl NetworkDiff {
    pub fn is_identical(&self) -> bool {
        *self == NetworkDiff::default()
    }
}

pub fn diff_networks(a: &Network, b: &Network) -> NetworkDiff {
    diff_with_tolerance(a, b, EPSILON)
}

pub fn diff_with_tolerance(a: &Network, b: &Network, tolerance: f64) -> NetworkDiff {
    let mut d = NetworkDiff::default();
    if a.version_label() != b.version_label() {
        d.version_label = Some((a.version_label().to_string(), b.version_label().to_string()));
    }

    let ids_a: BTreeSet<&str> = a.variables().iter().map(|v| v.id.as_str()).collect();
    let ids_b: BTreeSet<&str> = b.variables().iter().map(|v| v.id.as_str()).collect();
    d.variables_added = b
        .variables()
        .iter()
        .filter(|v| !ids_a.contains(v.id.as_str()))
        .map(|v| v.id.clone())
        .collect();
    d.variables_removed = a
        .variables()
        .iter()
        .filter(|v| !ids_b.contains(v.id.as_str()))
        .map(|v| v.id.clone())
        .collect();

    for vb in b.variables() {
        let Some(va) = a.variable(&vb.id) else { continue };
        let before: BTreeSet<&String> = va.outcomes.iter().collect();
        let after: BTreeSet<&String> = vb.outcomes.iter().collect();
        for o in &vb.outcomes {
            if !before.contains(o) {
                d.outcomes_added.push((vb.id.clone(), o.clone()));
            }
        }
        for o in &va.outcomes {
            if !after.contains(o) {
                d.outcomes_removed.push((vb.id.clone(), o.clone()));
            }
        }
        let common_a: Vec<&String> = va.outcomes.iter().filter(|o| after.contains(o)).collect();
        let common_b: Vec<&String> = vb.outcomes.iter().filter(|o| before.contains(o)).collect();
        if common_a != common_b {
            d.outcomes_reordered.push(vb.id.clone());
        }
    }

    let arcs = |n: &Network| -> BTreeSet<(String, String)> {
        n.variables()
            .iter()
            .flat_map(|v| n.parents(&v.id).iter().map(move |p| (p.clone(), v.id.clone())))
            .collect()
    };
    let (arcs_a, arcs_b) = (arcs(a), arcs(b));
    d.arcs_added = arcs_b.difference(&arcs_a).cloned().collect();
    d.arcs_removed = arcs_a.difference(&arcs_b).cloned().collect();
    for vb in b.variables() {
        if !ids_a.contains(vb.id.as_str()) {
            continue;
        }
        let pa: Vec<&String> = a.parents(&vb.id).iter().filter(|p| b.parents(&vb.id).contains(p)).collect();
        let pb: Vec<&String> = b.parents(&vb.id).iter().filter(|p| a.parents(&vb.id).contains(p)).collect();
        if pa != pb {
            d.parents_reordered.push(vb.id.clone());
        }
    }

    for vb in b.variables() {
        let Some(va) = a.variable(&vb.id) else { continue };
        let (Ok(fa), Ok(fb)) = (Frame::of(a, &va.id), Frame::of(b, &vb.id)) else {
            continue;
        };
        let (Some(ca), Some(cb)) = (a.cpt(&va.id), b.cpt(&vb.id)) else {
            continue;
        };
        let rows_a: BTreeMap<BTreeMap<String, String>, &Vec<f64>> = fa
            .configs()
            .zip(&ca.rows)
            .map(|(cfg, row)| (fa.label(&cfg), row))
            .collect();
        for (cfg, row_b) in fb.configs().zip(&cb.rows) {
            let key = fb.label(&cfg);
            let Some(row_a) = rows_a.get(&key) else { continue };
            for (j, outcome) in vb.outcomes.iter().enumerate() {
                let Some(i) = va.outcome_index(outcome) else { continue };
                let (Some(&old), Some(&new)) = (row_a.get(i), row_b.get(j)) else {
                    continue;
                };
                if !((old - new).abs() <= tolerance) {
                    d.cells.push(CellChange {
                        node: vb.id.clone(),
                        given: fb.describe(&cfg),
                        outcome: outcome.clone(),
                        old,
                        new,
                    });
                }
            }
        }
    }
    d
}

impl fmt::Display for NetworkDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((a, b)) = &self.version_label {
            writeln!(f, "version_label: {a} -> {b}")?;
        }
        if !self.variables_added.is_empty() || !self.variables_removed.is_empty() {
            writeln!(f, "variables:")?;
            for v in &self.variables_added {
                writeln!(f, "  + {v}")?;
            }
            for v in &self.variables_removed {
                writeln!(f, "  - {v}")?;
            }
        }
        if !self.outcomes_added.is_empty() || !self.outcomes_removed.is_empty() || !self.outcomes_reordered.is_empty()
        {
            writeln!(f, "outcomes:")?;
            for (v, o) in &self.outcomes_added {
                writeln!(f, "  {v}: + {o}")?;
            }
            for (v, o) in &self.outcomes_removed {
                writeln!(f, "  {v}: - {o}")?;
            }
            for v in &self.outcomes_reordered {
                writeln!(f, "  {v}: reordered")?;
            }
        }
        if !self.arcs_added.is_empty() || !self.arcs_removed.is_empty() || !self.parents_reordered.is_empty() {
            writeln!(f, "arcs:")?;
            for (x, y) in &self.arcs_added {
                writeln!(f, "  + {x} -> {y}")?;
            }
            for (x, y) in &self.arcs_removed {
                writeln!(f, "  - {x} -> {y}")?;
            }
            for v in &self.parents_reordered {
                writeln!(f, "  {v}: parents reordered")?;
            }
        }
        if !self.cells.is_empty() {
            writeln!(f, "cells:")?;
            for c in &self.cells {
                writeln!(f, "  {} [{}] {}: {} -> {}", c.node, c.given, c.outcome, c.old, c.new)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maintenance::{add_arc_general, add_outcomes_ignored};

    fn net() -> Network {
        Network::builder("E")
            .root("A", &["a1", "a2"], &[0.3, 0.7])
            .node("B", &["b1", "b2"], &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .root("C", &["c1", "c2"], &[0.5, 0.5])
            .build()
    }

    #[test]
    fn identical_networks() {
        assert!(diff_networks(&net(), &net()).is_identical());
        assert_eq!(diff_networks(&net(), &net()).to_string(), "");
    }

    #[test]
    fn rescaled_row_lists_cells() {
        let t = add_outcomes_ignored(
            &Network::builder("E").root("A", &["a1", "a2"], &[0.3, 0.7]).build(),
            "A",
            &["a3"],
            &[vec![0.2]],
        )
        .unwrap();
        let d = diff_networks(&t.before, &t.after);
        assert_eq!(d.outcomes_added, vec![("A".to_string(), "a3".to_string())]);
        assert_eq!(d.cells.len(), 2);
        let text = d.to_string();
        assert!(text.contains("outcomes:\n  A: + a3"));
        assert!(text.contains("A [-] a1: 0.3 -> 0.24"));
    }

    #[test]
    fn arcs_and_variables() {
        let t = add_arc_general(&net(), "C", "B", &[vec![0.9, 0.1], vec![0.9, 0.1], vec![0.2, 0.8], vec![0.2, 0.8]])
            .unwrap();
        let d = diff_networks(&t.before, &t.after);
        assert_eq!(d.arcs_added, vec![("C".to_string(), "B".to_string())]);
        assert!(d.cells.is_empty());
        let d = diff_networks(&t.after, &t.before);
        assert_eq!(d.arcs_removed, vec![("C".to_string(), "B".to_string())]);

        let smaller = Network::builder("E").root("A", &["a1", "a2"], &[0.3, 0.7]).build();
        let d = diff_networks(&net(), &smaller);
        assert_eq!(d.variables_removed, vec!["B".to_string(), "C".to_string()]);
    }
}
