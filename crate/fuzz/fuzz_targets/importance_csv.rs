#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::regression::{read_importance, write_importance};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = read_importance(data) {
        assert!(table.entries.iter().all(|e| e.importance >= 0.0));
        let mut out = Vec::new();
        write_importance(&table, &mut out).unwrap();
        let again = read_importance(out.as_slice()).expect("written importance parses");
        assert_eq!(again.entries.len(), table.entries.len());
    }
});
