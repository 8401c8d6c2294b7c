//! Runs the checked-in fuzz corpus through the same checks as the fuzz
//! targets, so the seeds stay meaningful without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use kbmaint::cli::parse_range;
use kbmaint::maintenance::{apply_script, parse_script};
use kbmaint::{network_from_json, network_to_json, validate_network, Network};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn network_seeds_round_trip() {
    let mut valid = 0;
    for (name, text) in corpus("network_json") {
        let net = network_from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        if validate_network(&net).is_valid() {
            valid += 1;
        }
        let again = network_from_json(&network_to_json(&net).unwrap()).unwrap();
        assert_eq!(again, net, "{name}");
    }
    assert!(valid >= 1);
}

fn script_base() -> Network {
    Network::builder("E")
        .root("A", &["a1", "a2"], &[0.3, 0.7])
        .root("C", &["c1", "c2", "c3"], &[0.2, 0.3, 0.5])
        .node("B", &["b1", "b2"], &["A", "C"], vec![vec![0.9, 0.1]; 6])
        .build()
}

#[test]
fn script_seeds_apply() {
    for (name, text) in corpus("change_script") {
        let ops = parse_script(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let ts = apply_script(&script_base(), &ops).unwrap_or_else(|e| panic!("{name}: {e}"));
        if let Some(t) = ts.last() {
            assert!(t.after.pending().is_empty(), "{name}");
            assert!(validate_network(&t.after).is_valid(), "{name}");
        }
    }
}

#[test]
fn range_seeds_parse() {
    for (name, text) in corpus("curve_range") {
        assert!(parse_range(&text).is_ok(), "{name}");
    }
}
