#![no_main]
use hfepr::expdsl::{emit_dataset, parse_dataset_csv, OutputFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = parse_dataset_csv(text) {
        let first = emit_dataset(&ds, OutputFormat::Csv);
        let back = parse_dataset_csv(std::str::from_utf8(&first).unwrap()).expect("emitted CSV parses");
        assert_eq!(emit_dataset(&back, OutputFormat::Csv), first);
    }
});
