#![no_main]
use hfepr::expdsl::{emit_dataset, parse_dataset_json, OutputFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = parse_dataset_json(text) {
        let first = emit_dataset(&ds, OutputFormat::Json);
        let back = parse_dataset_json(std::str::from_utf8(&first).unwrap()).expect("emitted JSON parses");
        assert_eq!(back, ds);
    }
});
