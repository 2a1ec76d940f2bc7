//! The configuration parser must reject arbitrary bytes gracefully: any
//! input may produce an error, but never a panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = qdot::config::parse_run_spec(text);
    }
});
