#![no_main]
use hfepr::expdsl::parse_experiment;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_experiment(src) {
        // whatever parses must survive the canonical form unchanged
        let canonical = cfg.to_source();
        let again = parse_experiment(&canonical).expect("canonical source parses");
        assert_eq!(again, cfg);
        assert_eq!(again.to_source(), canonical);
    }
});
