#![no_main]

use libfuzzer_sys::fuzz_target;
use subradiance::couplings::couplings_from_field;
use subradiance::io::parse_field_samples;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(samples) = parse_field_samples(text) {
        let _ = couplings_from_field(&samples, 10.0);
    }
});
