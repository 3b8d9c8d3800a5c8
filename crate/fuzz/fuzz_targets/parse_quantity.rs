#![no_main]
use hfepr::expdsl::parse_quantity;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_quantity(text) {
        Ok(q) => assert!(q.magnitude.is_finite()),
        Err(e) => assert!(e.offset <= text.chars().count()),
    }
});
