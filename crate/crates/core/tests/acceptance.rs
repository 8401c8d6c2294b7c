//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use kbmaint::cli;
use kbmaint::cost::{assessment_cost, ratio_curves, Case, CostQuery, Role};
use kbmaint::maintenance::{add_outcomes_ignored, add_variable, split_outcome, SplitInput, SuccessorUpdate};
use kbmaint::oracle::{check_assumed_constant_identity, check_ignored_identity, check_split_conservation};
use kbmaint::{network_from_json, network_to_json, AssessmentReport, Network, Variable};
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:?}, limit {limit:?}"))
}

fn run_cli(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ratio_of(line: &str) -> Result<f64, String> {
    line.trim()
        .rsplit("ratio=")
        .next()
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| format!("no ratio in `{line}`"))
}

fn ratio_reproduction() -> Outcome {
    let start = Instant::now();
    let base = ["kbmaint", "cost", "--case", "ignored", "--role"];
    let (code, out, err) = run_cli(&[&base[..], &["changed", "--m", "2", "--k", "1"]].concat());
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let changed = ratio_of(&out)?;
    ensure(changed == 0.5, || format!("changed ratio {changed}"))?;
    let (code, out, err) = run_cli(&[&base[..], &["successor", "--m", "2", "--k", "1"]].concat());
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let successor = ratio_of(&out)?;
    ensure((successor - 1.0 / 3.0).abs() <= 1e-12, || format!("successor ratio {successor}"))?;
    within(Duration::from_millis(500), start)?;
    Ok(format!("changed {changed}, successor {successor}"))
}

fn closed_form_curves() -> Outcome {
    let start = Instant::now();
    let ms: Vec<u64> = (1..=6).collect();
    let ks: Vec<u64> = (1..=10).collect();
    let pairs: [(Case, Role, fn(f64, f64) -> Option<f64>); 5] = [
        (Case::IgnoredOutcome, Role::ChangedNode, |m, k| Some(k / (m + k - 1.0))),
        (Case::IgnoredOutcome, Role::Successor, |m, k| Some(k / (m + k))),
        (Case::SplitOutcome, Role::ChangedNode, |m, k| {
            (m + k > 2.0).then(|| (k - 1.0) / (m + k - 2.0))
        }),
        (Case::SplitOutcome, Role::Successor, |m, k| Some(k / (m + k - 1.0))),
        (Case::AssumedConstant, Role::Successor, |_, k| Some((k - 1.0) / k)),
    ];
    let radix_sets: [&[usize]; 3] = [&[2], &[3, 3], &[2, 3, 4]];
    let mut checked = 0;
    for (case, role, closed) in pairs {
        let curve = ratio_curves(case, role, &ms, &ks).map_err(|e| e.to_string())?;
        ensure(curve.len() == ms.len() * ks.len(), || format!("{case}/{role}: {} points", curve.len()))?;
        for pt in curve {
            let expected = closed(pt.m as f64, pt.k as f64);
            match (pt.ratio, expected) {
                (Some(r), Some(e)) => ensure((r - e).abs() <= 1e-12, || {
                    format!("{case}/{role} m={} k={}: {r} vs {e}", pt.m, pt.k)
                })?,
                (None, None) => {}
                (r, e) => return Err(format!("{case}/{role} m={} k={}: {r:?} vs {e:?}", pt.m, pt.k)),
            }
            for radices in radix_sets {
                let res = assessment_cost(&CostQuery {
                    case,
                    role,
                    m: pt.m,
                    k: pt.k,
                    p: Some(3),
                    radices: radices.to_vec(),
                })
                .map_err(|e| e.to_string())?;
                let direct = (res.general > 0).then(|| res.special as f64 / res.general as f64);
                ensure(direct == pt.ratio, || {
                    format!("{case}/{role} m={} k={} radices {radices:?}: {direct:?} vs {:?}", pt.m, pt.k, pt.ratio)
                })?;
            }
            checked += 1;
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("{checked} points, 3 radix sets each"))
}

fn formula_enumeration_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(3);
    let mut kinds = BTreeMap::new();
    for i in 0..200 {
        let net = network(&mut rng, 1..=5, 2..=4, 2);
        let edit = random_edit(&mut rng, &net);
        let report = AssessmentReport::aggregate(edit.transactions.iter().map(|t| &t.report));
        for entry in &report.entries {
            let expected = edit.expected.get(&entry.node).copied().unwrap_or(0);
            ensure(entry.elicited == expected, || {
                format!(
                    "network {i}, {}: node {} elicited {} expected {expected}",
                    edit.description, entry.node, entry.elicited
                )
            })?;
        }
        let kind = edit.description.split(" on ").next().unwrap_or("").split(" with").next().unwrap_or("");
        let kind = kind.split(" N").next().unwrap_or(kind).to_string();
        *kinds.entry(kind).or_insert(0) += 1;
    }
    within(Duration::from_secs(30), start)?;
    let summary: Vec<String> = kinds.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    Ok(format!("200 networks ({})", summary.join(", ")))
}

/// Same network with one cell of `node`'s table shifted by `delta`.
fn perturbed(net: &Network, node: &str, row: usize, col: usize, delta: f64) -> Network {
    let mut cpts: BTreeMap<String, Vec<Vec<f64>>> =
        net.cpts().iter().map(|(id, c)| (id.clone(), c.rows.clone())).collect();
    cpts.get_mut(node).unwrap()[row][col] += delta;
    Network::new(
        net.version_label(),
        net.variables().to_vec(),
        net.parent_map().clone(),
        cpts,
    )
}

fn ignored_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(4);
    let mut perturbations = 0;
    for i in 0..200 {
        let net = network(&mut rng, 1..=5, 2..=4, 2);
        let node = ids(&net).choose(&mut rng).unwrap().clone();
        let m = net.variable(&node).unwrap().arity();
        let rows = product(&net.radices(&node).unwrap()) as usize;
        let k = rng.gen_range(1..=3);
        let labels: Vec<String> = (0..k).map(|j| format!("extra{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let probs: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let total = rng.gen_range(0.05..0.6);
                scaled(&mut rng, k, total)
            })
            .collect();
        let t = add_outcomes_ignored(&net, &node, &refs, &probs).map_err(|e| format!("network {i}: {e}"))?;
        let check = check_ignored_identity(&t.before, &t.after, &node, &refs).map_err(|e| e.to_string())?;
        ensure(check.holds(), || format!("network {i}: {:?}", check.failures))?;

        let table = &t.after.cpt(&node).unwrap().rows;
        for (r, row) in table.iter().enumerate() {
            for (c, cell) in row.iter().enumerate().take(m) {
                let delta = if cell + 1e-4 <= 1.0 { 1e-4 } else { -1e-4 };
                let bad = perturbed(&t.after, &node, r, c, delta);
                let check = check_ignored_identity(&t.before, &bad, &node, &refs).map_err(|e| e.to_string())?;
                ensure(!check.holds(), || format!("network {i}: perturbation of row {r} col {c} undetected"))?;
                perturbations += 1;
            }
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("200 transactions, {perturbations} perturbations detected"))
}

fn split_conservation() -> Outcome {
    let mut rng = rng(5);
    for i in 0..200 {
        let net = network(&mut rng, 1..=5, 2..=4, 2);
        let node = ids(&net).choose(&mut rng).unwrap().clone();
        let var = net.variable(&node).unwrap().clone();
        let m = var.arity();
        let s = rng.gen_range(0..m);
        let k = rng.gen_range(2..=3);
        let parts: Vec<String> = (0..k).map(|j| format!("part{j}")).collect();
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        let old = net.cpt(&node).unwrap().rows.clone();
        let input = if i % 2 == 0 {
            SplitInput::Weights(old.iter().map(|_| dist(&mut rng, k)).collect())
        } else {
            SplitInput::Probabilities(old.iter().map(|row| scaled(&mut rng, k, row[s])).collect())
        };
        let t = split_outcome(&net, &node, &var.outcomes[s], &refs, input).map_err(|e| format!("network {i}: {e}"))?;
        let new = &t.after.cpt(&node).unwrap().rows;
        for (j, (a, b)) in old.iter().zip(new).enumerate() {
            let mass: f64 = b[s..s + k].iter().sum();
            ensure((mass - a[s]).abs() <= 1e-9, || format!("network {i} row {j}: {mass} vs {}", a[s]))?;
            let kept_before: Vec<u64> = a.iter().enumerate().filter(|(c, _)| *c != s).map(|(_, x)| x.to_bits()).collect();
            let kept_after: Vec<u64> = b[..s].iter().chain(&b[s + k..]).map(|x| x.to_bits()).collect();
            ensure(kept_before == kept_after, || format!("network {i} row {j}: unchanged entries differ"))?;
        }
        let check = check_split_conservation(&t.before, &t.after, &node, &var.outcomes[s], &refs)
            .map_err(|e| e.to_string())?;
        ensure(check.holds(), || format!("network {i}: {:?}", check.failures))?;
    }
    Ok("200 transactions".into())
}

fn assumed_constant_identity() -> Outcome {
    let mut rng = rng(6);
    for i in 0..100 {
        let net = network(&mut rng, 1..=4, 2..=4, 2);
        let k = rng.gen_range(2..=4);
        let labels: Vec<String> = (0..k).map(|j| format!("a{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let base = rng.gen_range(0..k);
        let mut succ: Vec<String> = ids(&net).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        if succ.is_empty() {
            succ.push(ids(&net).choose(&mut rng).unwrap().clone());
        }
        let mut rows = BTreeMap::new();
        for s in &succ {
            let p = net.variable(s).unwrap().arity();
            let mut radices = net.radices(s).unwrap();
            radices.push(k);
            let pos = radices.len() - 1;
            rows.insert(s.clone(), rows_where(&mut rng, &radices, pos, p, |v| v != base));
        }
        let own = vec![dist(&mut rng, k)];
        let update = SuccessorUpdate::AssumedConstant {
            baseline: labels[base].clone(),
            rows,
        };
        let t = add_variable(&net, Variable::new("A", &refs), &[], &own, update)
            .map_err(|e| format!("network {i}: {e}"))?;
        let check = check_assumed_constant_identity(&t.before, &t.after, "A", &labels[base])
            .map_err(|e| e.to_string())?;
        ensure(check.holds(), || format!("network {i}: {:?}", check.failures))?;
    }
    Ok("100 transactions".into())
}

fn local_modularity() -> Outcome {
    let mut rng = rng(7);
    let mut count = 0;
    for i in 0..200 {
        let net = network(&mut rng, 1..=5, 2..=4, 2);
        let edit = random_edit(&mut rng, &net);
        for t in &edit.transactions {
            check_local_modularity(t).map_err(|e| format!("network {i}, {}: {e}", edit.description))?;
            count += 1;
        }
    }
    Ok(format!("{count} transactions"))
}

fn round_trip_and_atomicity() -> Outcome {
    let mut rng = rng(8);
    for i in 0..100 {
        let net = network(&mut rng, 1..=5, 2..=4, 2);
        let text = network_to_json(&net).map_err(|e| e.to_string())?;
        let parsed = network_from_json(&text).map_err(|e| format!("network {i}: {e}"))?;
        ensure(parsed == net, || format!("network {i}: parse changed the network"))?;
        let again = network_to_json(&parsed).map_err(|e| e.to_string())?;
        ensure(again == text, || format!("network {i}: serialization not stable"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let net = Network::builder("E")
        .root("A", &["a1", "a2"], &[0.3, 0.7])
        .node("B", &["b1", "b2"], &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
        .build();
    let input = dir.path().join("net.json");
    std::fs::write(&input, network_to_json(&net).unwrap()).map_err(|e| e.to_string())?;
    let script = dir.path().join("script.json");
    std::fs::write(
        &script,
        r#"[
          {"op": "add_outcomes", "node": "B", "new_outcomes": ["b3"], "mode": "ignored_outcome",
           "rows": [{"given": {"A": "a1"}, "probs": [0.1]}, {"given": {"A": "a2"}, "probs": [0.2]}]},
          {"op": "replace_cpt", "node": "A", "rows": [{"probs": [0.5, 0.6]}]}
        ]"#,
    )
    .map_err(|e| e.to_string())?;
    let out = dir.path().join("out.json");
    let (code, _, err) = run_cli(&[
        "kbmaint",
        "apply",
        input.to_str().unwrap(),
        script.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    ensure(code == 1, || format!("exit {code}"))?;
    ensure(err.contains("op 2"), || format!("message `{}` does not name op 2", err.trim()))?;
    ensure(!out.exists(), || "output written despite failure".into())?;
    Ok("100 round trips; failed script left no output".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 ratio reproduction", ratio_reproduction),
        ("2 closed-form curves", closed_form_curves),
        ("3 formula/enumeration agreement", formula_enumeration_agreement),
        ("4 ignored-outcome identity", ignored_identity),
        ("5 split conservation", split_conservation),
        ("6 assumed-constant identity", assumed_constant_identity),
        ("7 local modularity", local_modularity),
        ("8 round trip and atomicity", round_trip_and_atomicity),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
