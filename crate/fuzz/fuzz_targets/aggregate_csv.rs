#![no_main]
use libfuzzer_sys::fuzz_target;
use qstate_online::harness::{parse_aggregate_csv, write_aggregate_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_aggregate_csv(data) {
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &rows).expect("write to memory");
        let again = parse_aggregate_csv(buf.as_slice()).expect("re-parse");
        assert_eq!(again.len(), rows.len());
        for (a, b) in again.iter().zip(&rows) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.n_trials, b.n_trials);
            assert!(a.mean_avg_regret.to_bits() == b.mean_avg_regret.to_bits() || a.mean_avg_regret.is_nan() && b.mean_avg_regret.is_nan());
        }
    }
});
