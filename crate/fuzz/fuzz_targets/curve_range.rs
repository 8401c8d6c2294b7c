#![no_main]

use kbmaint::cli::{parse_range, MAX_RANGE_LEN};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_range(text) {
        assert!(!values.is_empty() && values.len() <= MAX_RANGE_LEN);
    }
});
