#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::regression::{read_significance, write_significance};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_significance(data) {
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.p_value)));
        let mut out = Vec::new();
        write_significance(&rows, &mut out).unwrap();
        let again = read_significance(out.as_slice()).expect("written significance parses");
        assert_eq!(again.len(), rows.len());
    }
});
