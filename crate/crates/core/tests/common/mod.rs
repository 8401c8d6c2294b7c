//! Seeded random networks and edit inputs shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use kbmaint::maintenance::{
    add_arc_assumed_constant, add_outcomes_ignored, add_variable, reuse_successor_rows_ignored,
    reuse_successor_rows_split, split_outcome, SplitInput, SuccessorUpdate,
};
use kbmaint::network::Configs;
use kbmaint::{EditOp, Network, ParentConfig, Transaction, Variable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive distribution over `len` outcomes.
pub fn dist(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// `len` positive values summing to `total`.
pub fn scaled(rng: &mut ChaCha8Rng, len: usize, total: f64) -> Vec<f64> {
    dist(rng, len).into_iter().map(|x| x * total).collect()
}

/// Random DAG over nodes `N0..`, each with up to `max_parents` parents chosen
/// among earlier nodes and an outcome count in `arities`.
pub fn network(
    rng: &mut ChaCha8Rng,
    nodes: std::ops::RangeInclusive<usize>,
    arities: std::ops::RangeInclusive<usize>,
    max_parents: usize,
) -> Network {
    let n = rng.gen_range(nodes);
    let mut variables = Vec::new();
    let mut parents = BTreeMap::new();
    let mut cpts = BTreeMap::new();
    for i in 0..n {
        let id = format!("N{i}");
        let arity = rng.gen_range(arities.clone());
        let labels: Vec<String> = (0..arity).map(|j| format!("n{i}_{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        variables.push(Variable::new(&id, &refs));

        let mut pool: Vec<usize> = (0..i).collect();
        pool.shuffle(rng);
        let count = rng.gen_range(0..=max_parents.min(i));
        let mut chosen: Vec<usize> = pool.into_iter().take(count).collect();
        chosen.sort_unstable();
        let ps: Vec<String> = chosen.iter().map(|j| format!("N{j}")).collect();
        let rows: usize = chosen.iter().map(|&j| variables[j].arity()).product();
        cpts.insert(id.clone(), (0..rows).map(|_| dist(rng, arity)).collect::<Vec<_>>());
        if !ps.is_empty() {
            parents.insert(id, ps);
        }
    }
    Network::new("E", variables, parents, cpts)
}

pub fn ids(net: &Network) -> Vec<String> {
    net.variables().iter().map(|v| v.id.clone()).collect()
}

pub fn product(radices: &[usize]) -> u64 {
    radices.iter().map(|&r| r as u64).product()
}

/// Rows for every configuration of `radices` whose value at `pos` satisfies
/// `pick`, each a distribution over `arity` outcomes.
pub fn rows_where(
    rng: &mut ChaCha8Rng,
    radices: &[usize],
    pos: usize,
    arity: usize,
    pick: impl Fn(usize) -> bool,
) -> BTreeMap<ParentConfig, Vec<f64>> {
    Configs::new(radices)
        .filter(|cfg| pick(cfg.as_slice()[pos]))
        .map(|cfg| (cfg, dist(rng, arity)))
        .collect()
}

/// CPT entries as bit patterns, for exact comparisons.
pub fn bits(net: &Network, id: &str) -> Vec<Vec<u64>> {
    net.cpt(id)
        .unwrap()
        .rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_bits()).collect())
        .collect()
}

/// One random special-case edit, completed: after an outcome-space change
/// every successor is reassessed by row reuse, so the last network has no
/// pending tables.
pub struct Edit {
    pub description: String,
    pub transactions: Vec<Transaction>,
    /// Elicited free parameters per node, from the closed forms.
    pub expected: BTreeMap<String, u64>,
}

impl Edit {
    pub fn after(&self) -> &Network {
        &self.transactions.last().unwrap().after
    }
}

fn other_parent_product(net: &Network, child: &str, changed: &str) -> u64 {
    net.parents(child)
        .iter()
        .filter(|p| *p != changed)
        .map(|p| net.variable(p).unwrap().arity() as u64)
        .product()
}

fn parent_product(net: &Network, node: &str) -> u64 {
    product(&net.radices(node).unwrap())
}

/// Applies one of: ignored outcomes, a split into two or more parts, an
/// assumed-constant arc, or an assumed-constant new root variable.
pub fn random_edit(rng: &mut ChaCha8Rng, net: &Network) -> Edit {
    let ids = ids(net);
    let mut choice = rng.gen_range(0..4);
    let arc = if choice == 2 {
        let mut candidates = Vec::new();
        for f in &ids {
            for t in &ids {
                if f != t && !net.has_arc(f, t) && !net.reaches(t, f) && net.parents(t).len() < 2 {
                    candidates.push((f.clone(), t.clone()));
                }
            }
        }
        candidates.choose(rng).cloned()
    } else {
        None
    };
    if choice == 2 && arc.is_none() {
        choice = 0;
    }
    match choice {
        0 | 1 => outcome_edit(rng, net, choice == 1),
        2 => {
            let (from, to) = arc.unwrap();
            let from_var = net.variable(&from).unwrap().clone();
            let k = from_var.arity();
            let base = rng.gen_range(0..k);
            let p = net.variable(&to).unwrap().arity();
            let mut radices = net.radices(&to).unwrap();
            radices.push(k);
            let pos = radices.len() - 1;
            let rows = rows_where(rng, &radices, pos, p, |v| v != base);
            let r = parent_product(net, &to);
            let t = add_arc_assumed_constant(net, &from, &to, &from_var.outcomes[base], &rows).unwrap();
            let expected = BTreeMap::from([(to.clone(), (k as u64 - 1) * (p as u64 - 1) * r)]);
            Edit {
                description: format!("assumed-constant arc {from}->{to}"),
                transactions: vec![t],
                expected,
            }
        }
        _ => {
            let k = rng.gen_range(2..=4);
            let labels: Vec<String> = (0..k).map(|j| format!("a{j}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let base = rng.gen_range(0..k);
            let mut successors: Vec<String> = ids.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if successors.is_empty() {
                successors.push(ids.choose(rng).unwrap().clone());
            }
            let mut expected = BTreeMap::from([("A".to_string(), k as u64 - 1)]);
            let mut rows = BTreeMap::new();
            for s in &successors {
                let p = net.variable(s).unwrap().arity();
                let mut radices = net.radices(s).unwrap();
                radices.push(k);
                let pos = radices.len() - 1;
                rows.insert(s.clone(), rows_where(rng, &radices, pos, p, |v| v != base));
                expected.insert(s.clone(), (k as u64 - 1) * (p as u64 - 1) * parent_product(net, s));
            }
            let own = vec![dist(rng, k)];
            let t = add_variable(
                net,
                Variable::new("A", &refs),
                &[],
                &own,
                SuccessorUpdate::AssumedConstant {
                    baseline: labels[base].clone(),
                    rows,
                },
            )
            .unwrap();
            Edit {
                description: format!("assumed-constant root A with successors {}", successors.join(",")),
                transactions: vec![t],
                expected,
            }
        }
    }
}

fn outcome_edit(rng: &mut ChaCha8Rng, net: &Network, split: bool) -> Edit {
    let ids = ids(net);
    let node = ids.choose(rng).unwrap().clone();
    let var = net.variable(&node).unwrap().clone();
    let m = var.arity();
    let rows = parent_product(net, &node) as usize;
    let r = rows as u64;
    let (first, k, t) = if split {
        let k = rng.gen_range(2..=3);
        let s = rng.gen_range(0..m);
        let parts: Vec<String> = (0..k).map(|j| format!("{}_part{j}", var.outcomes[s])).collect();
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        let weights: Vec<Vec<f64>> = (0..rows).map(|_| dist(rng, k)).collect();
        let t = split_outcome(net, &node, &var.outcomes[s], &refs, SplitInput::Weights(weights)).unwrap();
        (s, k, t)
    } else {
        let k = rng.gen_range(1..=3);
        let labels: Vec<String> = (0..k).map(|j| format!("{node}_new{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let probs: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let total = rng.gen_range(0.05..0.6);
                scaled(rng, k, total)
            })
            .collect();
        (m, k, add_outcomes_ignored(net, &node, &refs, &probs).unwrap())
    };
    let mut expected = BTreeMap::new();
    expected.insert(
        node.clone(),
        if split { (k as u64 - 1) * r } else { k as u64 * r },
    );
    let mut transactions = vec![t];
    for child in net.children(&node) {
        let current = &transactions.last().unwrap().after;
        let p = current.variable(child).unwrap().arity();
        let radices = current.radices(child).unwrap();
        let pos = current.parents(child).iter().position(|x| *x == node).unwrap();
        let fresh = |v: usize| v >= first && v < first + k;
        let block = rows_where(rng, &radices, pos, p, fresh);
        let t = if split {
            reuse_successor_rows_split(current, child, &node, &block).unwrap()
        } else {
            reuse_successor_rows_ignored(current, child, &node, &block).unwrap()
        };
        expected.insert(
            child.to_string(),
            k as u64 * (p as u64 - 1) * other_parent_product(net, child, &node),
        );
        transactions.push(t);
    }
    Edit {
        description: format!(
            "{} on {node} (m={m}, k={k})",
            if split { "split" } else { "ignored outcomes" }
        ),
        transactions,
        expected,
    }
}

/// Nodes whose table is allowed to change in `t`: changed outcome space,
/// changed parent list, a parent with a changed outcome space, a table
/// awaiting reassessment, or the target of a table replacement.
pub fn check_local_modularity(t: &Transaction) -> Result<(), String> {
    let (before, after) = (&t.before, &t.after);
    let outcomes_changed = |id: &str| match (before.variable(id), after.variable(id)) {
        (Some(a), Some(b)) => a.outcomes != b.outcomes,
        _ => true,
    };
    for v in before.variables() {
        let id = v.id.as_str();
        if after.variable(id).is_none()
            || outcomes_changed(id)
            || before.parents(id) != after.parents(id)
            || before.parents(id).iter().any(|p| outcomes_changed(p))
            || before.pending_for(id).is_some()
            || matches!(&t.op, EditOp::ReplaceCpt { node, .. } if node == id)
        {
            continue;
        }
        if bits(before, id) != bits(after, id) {
            return Err(format!("table of {id} changed"));
        }
    }
    Ok(())
}
