#![no_main]

use kbmaint::maintenance::{apply_script, parse_script};
use kbmaint::{validate_network, Network};
use libfuzzer_sys::fuzz_target;

fn base() -> Network {
    Network::builder("E")
        .root("A", &["a1", "a2"], &[0.3, 0.7])
        .root("C", &["c1", "c2", "c3"], &[0.2, 0.3, 0.5])
        .node("B", &["b1", "b2"], &["A", "C"], vec![vec![0.9, 0.1]; 6])
        .build()
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(ops) = parse_script(text) else { return };
    if let Ok(transactions) = apply_script(&base(), &ops) {
        for t in &transactions {
            assert!(validate_network(&t.after).is_valid());
        }
    }
});
