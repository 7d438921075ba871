#![no_main]

use libfuzzer_sys::fuzz_target;
use shadowsim::parse::GridSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = GridSpec::parse(input) {
        // Accepted specs must enumerate: finite values, exact count.
        let mut n = 0usize;
        for v in grid.values() {
            assert!(v.is_finite(), "grid value not finite for {input:?}");
            n += 1;
        }
        assert_eq!(n, grid.count);
    }
});
