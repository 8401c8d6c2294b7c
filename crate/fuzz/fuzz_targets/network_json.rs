#![no_main]

use kbmaint::{network_from_json, network_to_json, validate_network};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(net) = network_from_json(text) else { return };
    let report = validate_network(&net);
    for f in &report.findings {
        let _ = f.to_string();
    }
    let out = network_to_json(&net).expect("parsed networks serialize");
    let again = network_from_json(&out).expect("serialized networks parse");
    assert_eq!(again, net);
});
