//! Every spec the parser accepts must survive a serialize/reparse cycle
//! unchanged, so written model files are stable across reads.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = qdot::config::parse_run_spec(text) else {
        return;
    };
    let json = serde_json::to_string(&spec).expect("accepted specs serialize");
    let back = qdot::config::parse_run_spec(&json).expect("serialized specs reparse");
    assert_eq!(back, spec, "spec changed across a write/read cycle");
});
