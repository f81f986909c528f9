#![no_main]

use libfuzzer_sys::fuzz_target;
use subradiance::io::{parse_pure_state, pure_state_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(psi) = parse_pure_state(text) {
        // accepted states serialize and parse back unchanged
        let again = parse_pure_state(&pure_state_to_json(&psi)).expect("round trip");
        assert_eq!(again.amplitudes(), psi.amplitudes());
    }
});
