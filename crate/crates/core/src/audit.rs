//! Per-node elicitation counts for concrete transactions.
//!
//! Counts come from walking the rows of every rewritten table and asking
//! where each row came from, so they can be checked against the closed forms
//! in [`crate::cost`].

use serde::Serialize;

use crate::maintenance::{RowSource, Transaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    /// Table untouched by the edit.
    Unchanged,
    /// Table rewritten.
    Reencoded,
    /// Table still shaped for a parent's old outcome space.
    Pending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeAssessment {
    pub node: String,
    pub status: NodeStatus,
    /// Free parameters supplied by the expert.
    pub elicited: u64,
    /// Free parameters carried over or derived from the previous state.
    pub reused: u64,
    /// Free parameters a full re-encoding of the new table would need.
    pub general_baseline: u64,
    /// Values produced by a convenience rule outside the reuse cases.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AssessmentReport {
    pub entries: Vec<NodeAssessment>,
}

impl AssessmentReport {
    pub fn entry(&self, node: &str) -> Option<&NodeAssessment> {
        self.entries.iter().find(|e| e.node == node)
    }

    pub fn total_elicited(&self) -> u64 {
        self.entries.iter().map(|e| e.elicited).sum()
    }

    /// Sums several reports node by node; a node's status is the last
    /// non-unchanged status seen.
    pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a AssessmentReport>) -> AssessmentReport {
        let mut out = AssessmentReport::default();
        for report in reports {
            for e in &report.entries {
                match out.entries.iter_mut().find(|x| x.node == e.node) {
                    Some(x) => {
                        x.elicited += e.elicited;
                        x.reused += e.reused;
                        x.general_baseline += e.general_baseline;
                        x.heuristic |= e.heuristic;
                        if e.status != NodeStatus::Unchanged {
                            x.status = e.status;
                        }
                    }
                    None => out.entries.push(e.clone()),
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(AUDIT_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.node, e.elicited, e.reused, e.general_baseline
            ));
        }
        out
    }
}

pub const AUDIT_HEADER: &str = "node,elicited,reused,general_baseline";

/// Counts elicited and reused free parameters for every node of
/// `t.after`. Nodes the edit did not touch report zeros.
pub fn audit_transaction(t: &Transaction) -> AssessmentReport {
    let entries = t
        .after
        .variables()
        .iter()
        .map(|v| {
            let Some(sources) = t.provenance.get(&v.id) else {
                let status = if t.after.pending_for(&v.id).is_some() {
                    NodeStatus::Pending
                } else {
                    NodeStatus::Unchanged
                };
                return NodeAssessment {
                    node: v.id.clone(),
                    status,
                    elicited: 0,
                    reused: 0,
                    general_baseline: 0,
                    heuristic: false,
                };
            };
            let arity = v.arity();
            let free = arity.saturating_sub(1) as u64;
            let general_baseline = free * sources.len() as u64;
            let elicited: u64 = sources.iter().map(|s| s.elicited(arity) as u64).sum();
            NodeAssessment {
                node: v.id.clone(),
                status: NodeStatus::Reencoded,
                elicited,
                reused: general_baseline - elicited,
                general_baseline,
                heuristic: sources.iter().any(|s| matches!(s, RowSource::Derived)),
            }
        })
        .collect();
    AssessmentReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maintenance::{add_outcomes_ignored, replace_cpt};
    use crate::network::Network;

    fn two_ternary_parents() -> Network {
        let rows = vec![vec![0.2, 0.3, 0.5]; 9];
        Network::builder("E")
            .root("P", &["p1", "p2", "p3"], &[0.2, 0.3, 0.5])
            .root("Q", &["q1", "q2", "q3"], &[0.2, 0.3, 0.5])
            .node("A", &["a1", "a2", "a3"], &["P", "Q"], rows)
            .build()
    }

    #[test]
    fn ignored_outcome_audit_matches_formula() {
        let t = add_outcomes_ignored(&two_ternary_parents(), "A", &["a4", "a5"], &vec![vec![0.1, 0.1]; 9]).unwrap();
        let e = audit_transaction(&t);
        let a = e.entry("A").unwrap();
        assert_eq!((a.elicited, a.general_baseline, a.reused), (18, 36, 18));
        assert_eq!(e.entry("P").unwrap().status, NodeStatus::Unchanged);
        assert_eq!(e.entry("P").unwrap().elicited, 0);
    }

    #[test]
    fn replace_reuses_nothing() {
        let t = replace_cpt(&two_ternary_parents(), "P", &[vec![0.1, 0.1, 0.8]]).unwrap();
        assert_eq!(t.report.entry("P").unwrap().reused, 0);
        assert_eq!(
            t.report.to_csv(),
            "node,elicited,reused,general_baseline\nP,2,0,2\nQ,0,0,0\nA,0,0,0\n"
        );
    }

    #[test]
    fn aggregate_sums_per_node() {
        let t1 = replace_cpt(&two_ternary_parents(), "P", &[vec![0.1, 0.1, 0.8]]).unwrap();
        let t2 = replace_cpt(&t1.after, "P", &[vec![0.2, 0.1, 0.7]]).unwrap();
        let agg = AssessmentReport::aggregate([&t1.report, &t2.report]);
        assert_eq!(agg.entry("P").unwrap().elicited, 4);
        assert_eq!(agg.entries.len(), 3);
    }
}
