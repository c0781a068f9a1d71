#![no_main]

use libfuzzer_sys::fuzz_target;
use planar_spin::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = RunConfig::from_json(text) {
        assert!(c.mu().is_finite());
        assert!(c.t_span[1] > c.t_span[0]);
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
});
