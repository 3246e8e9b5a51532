#![no_main]
use libfuzzer_sys::fuzz_target;
use qstate_online::harness::parse_trial_csv;

fuzz_target!(|data: &[u8]| {
    let _ = parse_trial_csv(data);
});
