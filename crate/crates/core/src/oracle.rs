//! Exact joint-distribution enumeration.
//!
//! The joint is the chain-rule product of CPT entries over every full
//! assignment. It is exponential and only meant for checking identities on
//! small networks; the edit path never calls into this module.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::network::{config_count, config_index, validate_network, Configs, Network, ParentConfig};

/// Default upper bound on joint table size.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Agreement tolerance for identities checked through the joint.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("joint table would have {size} cells, above the cap of {cap}")]
    CapExceeded { size: String, cap: usize },
    #[error("network is not valid: {0}")]
    Invalid(String),
    #[error("node `{0}` is awaiting reassessment")]
    Pending(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("outcome index {index} out of range for `{var}`")]
    BadOutcome { var: String, index: usize },
    #[error("evidence has probability zero")]
    ZeroEvidence,
}

/// Joint probabilities over `variables`, laid out like parent configurations
/// (last variable fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub variables: Vec<String>,
    pub radices: Vec<usize>,
    pub probs: Vec<f64>,
}

impl JointTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn position(&self, var: &str) -> Result<usize, OracleError> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| OracleError::UnknownVariable(var.to_string()))
    }

    /// Iterates `(assignment, probability)` pairs in table order.
    pub fn cells(&self) -> impl Iterator<Item = (ParentConfig, f64)> + '_ {
        Configs::new(&self.radices).zip(self.probs.iter().copied())
    }
}

/// Joint over every variable of `net`.
pub fn joint_distribution(net: &Network) -> Result<JointTable, OracleError> {
    joint_distribution_capped(net, DEFAULT_CAP)
}

pub fn joint_distribution_capped(net: &Network, cap: usize) -> Result<JointTable, OracleError> {
    let report = validate_network(net);
    if let Some(f) = report.findings.first() {
        return Err(OracleError::Invalid(f.to_string()));
    }
    let all: Vec<String> = net.variables().iter().map(|v| v.id.clone()).collect();
    product_over(net, &all, cap)
}

/// Joint over `nodes` and all their ancestors, in declaration order.
///
/// Descendants marginalize out of the chain-rule product exactly, so this is
/// the marginal of the full joint. Unlike [`joint_distribution`] it only
/// needs the CPTs of the ancestral set to be in shape, which makes it usable
/// while successors of a changed node are awaiting reassessment.
pub fn ancestral_joint(net: &Network, nodes: &[&str], cap: usize) -> Result<JointTable, OracleError> {
    let mut closed = BTreeSet::new();
    let mut stack: Vec<&str> = nodes.to_vec();
    while let Some(n) = stack.pop() {
        if net.variable(n).is_none() {
            return Err(OracleError::UnknownVariable(n.to_string()));
        }
        if closed.insert(n.to_string()) {
            stack.extend(net.parents(n).iter().map(String::as_str));
        }
    }
    let ordered: Vec<String> = net
        .variables()
        .iter()
        .filter(|v| closed.contains(&v.id))
        .map(|v| v.id.clone())
        .collect();
    for id in &ordered {
        if net.pending_for(id).is_some() {
            return Err(OracleError::Pending(id.clone()));
        }
    }
    product_over(net, &ordered, cap)
}

/// Chain-rule product restricted to an ancestrally closed variable set. Row
/// sums are not assumed; entries are multiplied exactly as stored.
fn product_over(net: &Network, vars: &[String], cap: usize) -> Result<JointTable, OracleError> {
    let mut radices = Vec::with_capacity(vars.len());
    for id in vars {
        let v = net.variable(id).ok_or_else(|| OracleError::UnknownVariable(id.clone()))?;
        radices.push(v.arity());
    }
    let size = config_count(&radices).map_err(|_| OracleError::CapExceeded {
        size: "overflow".into(),
        cap,
    })?;
    if size > cap {
        return Err(OracleError::CapExceeded {
            size: size.to_string(),
            cap,
        });
    }

    // For each variable: its CPT, its parents' positions in `vars`, parent radices.
    struct Factor<'a> {
        rows: &'a [Vec<f64>],
        parent_pos: Vec<usize>,
        parent_radices: Vec<usize>,
    }
    let mut factors = Vec::with_capacity(vars.len());
    for id in vars {
        let cpt = net
            .cpt(id)
            .ok_or_else(|| OracleError::Invalid(format!("node {id} has no cpt")))?;
        let mut parent_pos = Vec::new();
        for p in net.parents(id) {
            let pos = vars
                .iter()
                .position(|v| v == p)
                .ok_or_else(|| OracleError::Invalid(format!("parent {p} of {id} outside the set")))?;
            parent_pos.push(pos);
        }
        let parent_radices = parent_pos.iter().map(|&i| radices[i]).collect::<Vec<_>>();
        let expected_rows = config_count(&parent_radices).unwrap_or(usize::MAX);
        if cpt.rows.len() != expected_rows || cpt.rows.iter().any(|r| r.len() != net.variable(id).map_or(0, |v| v.arity())) {
            return Err(OracleError::Invalid(format!("cpt of {id} does not match its shape")));
        }
        factors.push(Factor {
            rows: &cpt.rows,
            parent_pos,
            parent_radices,
        });
    }

    let mut probs = Vec::with_capacity(size);
    for assignment in Configs::new(&radices) {
        let a = assignment.as_slice();
        let mut p = 1.0;
        for (pos, f) in factors.iter().enumerate() {
            let cfg = ParentConfig::new(f.parent_pos.iter().map(|&i| a[i]).collect());
            let row = config_index(&cfg, &f.parent_radices).expect("assignment within radices");
            p *= f.rows[row][a[pos]];
        }
        probs.push(p);
    }
    Ok(JointTable {
        variables: vars.to_vec(),
        radices,
        probs,
    })
}

/// `P(query | evidence)` as a normalized table over query assignments (last
/// query variable fastest). Evidence is `(variable, outcome index)` pairs.
pub fn conditional(
    joint: &JointTable,
    query: &[&str],
    evidence: &[(&str, usize)],
) -> Result<Vec<f64>, OracleError> {
    let query_pos = query
        .iter()
        .map(|q| joint.position(q))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ev = Vec::with_capacity(evidence.len());
    for &(var, idx) in evidence {
        let pos = joint.position(var)?;
        if idx >= joint.radices[pos] {
            return Err(OracleError::BadOutcome {
                var: var.to_string(),
                index: idx,
            });
        }
        ev.push((pos, idx));
    }
    let query_radices: Vec<usize> = query_pos.iter().map(|&i| joint.radices[i]).collect();
    let mut out = vec![0.0; config_count(&query_radices).unwrap_or(0)];
    let mut mass = 0.0;
    for (assignment, p) in joint.cells() {
        let a = assignment.as_slice();
        if ev.iter().all(|&(pos, idx)| a[pos] == idx) {
            let key = ParentConfig::new(query_pos.iter().map(|&i| a[i]).collect());
            out[config_index(&key, &query_radices).expect("in range")] += p;
            mass += p;
        }
    }
    if mass <= 0.0 {
        return Err(OracleError::ZeroEvidence);
    }
    for v in &mut out {
        *v /= mass;
    }
    Ok(out)
}

/// Outcome of an identity check; `failures` explains each mismatch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckOutcome {
    pub failures: Vec<String>,
    pub skipped: Vec<String>,
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ORACLE_TOLERANCE
}

/// Per parent configuration of `node` with positive probability:
/// `P(node = a | config)` computed through the chain rule, i.e. the joint of
/// node and ancestors divided by the joint of the ancestors alone.
fn node_conditionals(
    net: &Network,
    node: &str,
) -> Result<Vec<(ParentConfig, Option<Vec<f64>>)>, OracleError> {
    let with_node = ancestral_joint(net, &[node], DEFAULT_CAP)?;
    let parents: Vec<&str> = net.parents(node).iter().map(String::as_str).collect();
    let without_node = ancestral_joint(net, &parents, DEFAULT_CAP)?;
    let arity = net.variable(node).map(|v| v.arity()).unwrap_or(0);
    let node_pos = with_node.position(node)?;
    let parent_pos_with: Vec<usize> = parents
        .iter()
        .map(|p| with_node.position(p))
        .collect::<Result<_, _>>()?;
    let parent_pos_without: Vec<usize> = parents
        .iter()
        .map(|p| without_node.position(p))
        .collect::<Result<_, _>>()?;
    let radices = net.radices(node).map_err(|e| OracleError::Invalid(e.to_string()))?;

    let n_configs = config_count(&radices).unwrap_or(0);
    let mut config_mass = vec![0.0; n_configs];
    for (a, p) in without_node.cells() {
        let cfg = ParentConfig::new(parent_pos_without.iter().map(|&i| a.as_slice()[i]).collect());
        config_mass[config_index(&cfg, &radices).expect("in range")] += p;
    }
    let mut joint_mass = vec![vec![0.0; arity]; n_configs];
    for (a, p) in with_node.cells() {
        let s = a.as_slice();
        let cfg = ParentConfig::new(parent_pos_with.iter().map(|&i| s[i]).collect());
        joint_mass[config_index(&cfg, &radices).expect("in range")][s[node_pos]] += p;
    }
    Ok(Configs::new(&radices)
        .zip(config_mass.into_iter().zip(joint_mass))
        .map(|(cfg, (mass, joint))| {
            if mass > 0.0 {
                (cfg, Some(joint.into_iter().map(|x| x / mass).collect()))
            } else {
                (cfg, None)
            }
        })
        .collect())
}

/// Checks that conditioning the new state on "none of the new outcomes
/// occurred" recovers the old distribution of `node` for every parent
/// configuration, and that the new conditional is a proper distribution.
///
/// Configurations with zero probability, or where the new outcomes carry all
/// the mass, are skipped.
pub fn check_ignored_identity(
    before: &Network,
    after: &Network,
    node: &str,
    new_outcomes: &[&str],
) -> Result<CheckOutcome, OracleError> {
    let old = node_conditionals(before, node)?;
    let new = node_conditionals(after, node)?;
    let var = after
        .variable(node)
        .ok_or_else(|| OracleError::UnknownVariable(node.to_string()))?;
    let new_idx: Vec<usize> = new_outcomes
        .iter()
        .map(|o| {
            var.outcome_index(o).ok_or_else(|| OracleError::UnknownVariable(format!("{node}={o}")))
        })
        .collect::<Result<_, _>>()?;
    let old_var = before
        .variable(node)
        .ok_or_else(|| OracleError::UnknownVariable(node.to_string()))?;

    let mut out = CheckOutcome::default();
    for ((cfg, old_dist), (_, new_dist)) in old.into_iter().zip(new) {
        let (Some(old_dist), Some(new_dist)) = (old_dist, new_dist) else {
            out.skipped.push(format!("{cfg}: zero probability"));
            continue;
        };
        let total: f64 = new_dist.iter().sum();
        if !close(total, 1.0) {
            out.failures.push(format!("{cfg}: conditional sums to {total}"));
            continue;
        }
        let kept: f64 = new_dist
            .iter()
            .enumerate()
            .filter(|(i, _)| !new_idx.contains(i))
            .map(|(_, p)| p)
            .sum();
        if kept <= ORACLE_TOLERANCE {
            out.skipped.push(format!("{cfg}: new outcomes carry all mass"));
            continue;
        }
        for (i, label) in old_var.outcomes.iter().enumerate() {
            let Some(j) = var.outcome_index(label) else {
                out.failures.push(format!("{cfg}: outcome {label} missing after edit"));
                continue;
            };
            let lhs = new_dist[j] / kept;
            if !close(lhs, old_dist[i]) {
                out.failures.push(format!(
                    "{cfg}: P({node}={label} | not new) = {lhs}, before {}",
                    old_dist[i]
                ));
            }
        }
    }
    Ok(out)
}

/// Checks that the new joint conditioned on `a = baseline` equals the old
/// joint (itself conditioned on `a = baseline` when `a` already existed),
/// cell by cell over every other variable.
pub fn check_assumed_constant_identity(
    before: &Network,
    after: &Network,
    a: &str,
    baseline: &str,
) -> Result<CheckOutcome, OracleError> {
    let after_joint = joint_distribution(after)?;
    let before_joint = joint_distribution(before)?;
    let a_var = after
        .variable(a)
        .ok_or_else(|| OracleError::UnknownVariable(a.to_string()))?;
    let base_idx = a_var
        .outcome_index(baseline)
        .ok_or_else(|| OracleError::UnknownVariable(format!("{a}={baseline}")))?;

    let rest: Vec<&str> = before
        .variables()
        .iter()
        .map(|v| v.id.as_str())
        .filter(|id| *id != a)
        .collect();
    let lhs = conditional(&after_joint, &rest, &[(a, base_idx)])?;
    let rhs = match before.variable(a) {
        Some(old_a) => {
            let idx = old_a
                .outcome_index(baseline)
                .ok_or_else(|| OracleError::UnknownVariable(format!("{a}={baseline}")))?;
            conditional(&before_joint, &rest, &[(a, idx)])?
        }
        None => conditional(&before_joint, &rest, &[])?,
    };

    let mut out = CheckOutcome::default();
    if lhs.len() != rhs.len() {
        out.failures.push(format!("table sizes differ: {} vs {}", lhs.len(), rhs.len()));
        return Ok(out);
    }
    for (cell, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        if !close(*l, *r) {
            out.failures.push(format!("cell {cell}: {l} vs {r}"));
        }
    }
    Ok(out)
}

/// Checks that, for every parent configuration of `node`, the probability of
/// the parts after a split equals the probability of the split outcome
/// before, and that every other outcome keeps its probability.
pub fn check_split_conservation(
    before: &Network,
    after: &Network,
    node: &str,
    split_label: &str,
    parts: &[&str],
) -> Result<CheckOutcome, OracleError> {
    let old = node_conditionals(before, node)?;
    let new = node_conditionals(after, node)?;
    let old_var = before
        .variable(node)
        .ok_or_else(|| OracleError::UnknownVariable(node.to_string()))?;
    let new_var = after
        .variable(node)
        .ok_or_else(|| OracleError::UnknownVariable(node.to_string()))?;
    let s = old_var
        .outcome_index(split_label)
        .ok_or_else(|| OracleError::UnknownVariable(format!("{node}={split_label}")))?;
    let part_idx: Vec<usize> = parts
        .iter()
        .map(|p| {
            new_var
                .outcome_index(p)
                .ok_or_else(|| OracleError::UnknownVariable(format!("{node}={p}")))
        })
        .collect::<Result<_, _>>()?;

    let mut out = CheckOutcome::default();
    for ((cfg, old_dist), (_, new_dist)) in old.into_iter().zip(new) {
        let (Some(old_dist), Some(new_dist)) = (old_dist, new_dist) else {
            out.skipped.push(format!("{cfg}: zero probability"));
            continue;
        };
        let part_mass: f64 = part_idx.iter().map(|&i| new_dist[i]).sum();
        if !close(part_mass, old_dist[s]) {
            out.failures
                .push(format!("{cfg}: parts carry {part_mass}, split outcome had {}", old_dist[s]));
        }
        for (i, label) in old_var.outcomes.iter().enumerate() {
            if i == s {
                continue;
            }
            match new_var.outcome_index(label) {
                Some(j) if close(new_dist[j], old_dist[i]) => {}
                Some(j) => out.failures.push(format!(
                    "{cfg}: {label} moved from {} to {}",
                    old_dist[i], new_dist[j]
                )),
                None => out.failures.push(format!("{cfg}: outcome {label} missing after split")),
            }
        }
    }
    Ok(out)
}
