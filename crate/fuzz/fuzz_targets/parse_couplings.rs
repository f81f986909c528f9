#![no_main]

use libfuzzer_sys::fuzz_target;
use subradiance::couplings::decompose;
use subradiance::io::{couplings_to_json, parse_couplings};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_couplings(text) {
        let again = parse_couplings(&couplings_to_json(&c)).expect("round trip");
        assert_eq!(again.gamma(), c.gamma());
        let _ = decompose(&c);
    }
});
