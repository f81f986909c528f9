#![no_main]

use libfuzzer_sys::fuzz_target;
use subradiance::io::parse_density_matrix;

fuzz_target!(|data: &[u8]| {
    // a 10-emitter matrix is about 40 MB of JSON; larger inputs add nothing
    if data.len() > 1 << 22 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_density_matrix(text);
});
