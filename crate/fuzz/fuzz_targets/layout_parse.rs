//! Layout documents come from users, so the parser must never panic and a
//! successfully parsed layout must serialize back to an equivalent one.

#![no_main]

use libfuzzer_sys::fuzz_target;
use shadowsim::layout::text::{parse_layout_str, to_layout_text};

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    if let Ok(layout) = parse_layout_str(input) {
        let text = to_layout_text(&layout);
        let back = parse_layout_str(&text).expect("serialized layout must reparse");
        assert_eq!(back, layout, "layout round-trip must be lossless");
    }
});
