#![no_main]
use libfuzzer_sys::fuzz_target;
use qstate_online::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_toml(text) {
            // Anything accepted must survive a round trip.
            let again = ExperimentConfig::from_toml(&cfg.to_toml()).expect("re-parse");
            assert_eq!(again, cfg);
        }
    }
});
