#![no_main]

use libfuzzer_sys::fuzz_target;
use shadowsim::parse::parse_angles4;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    if let Ok(angles) = parse_angles4(input) {
        assert!(angles.iter().all(|a| a.is_finite()));
    }
});
