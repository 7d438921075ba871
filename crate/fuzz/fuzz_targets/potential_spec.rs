#![no_main]

use libfuzzer_sys::fuzz_target;
use shadowsim::parse::PotentialSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    if let Ok(PotentialSpec::Harmonic { omega }) = PotentialSpec::parse(input) {
        assert!(omega.is_finite() && omega > 0.0);
    }
});
