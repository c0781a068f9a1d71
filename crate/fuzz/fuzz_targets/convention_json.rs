#![no_main]

use libfuzzer_sys::fuzz_target;
use planar_spin::Convention;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = Convention::from_json(text) {
        assert_eq!(Convention::from_json(&c.to_json()).unwrap(), c);
    }
});
