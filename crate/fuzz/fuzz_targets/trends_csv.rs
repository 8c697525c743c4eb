#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::regression::{read_trends, write_trends, ImportanceTable};

fuzz_target!(|data: &[u8]| {
    if let Ok(trends) = read_trends(data) {
        let table = ImportanceTable::new(Vec::new(), trends);
        let mut out = Vec::new();
        write_trends(&table, &mut out).unwrap();
        let again = read_trends(out.as_slice()).expect("written trends parse");
        assert_eq!(again, table.trends);
    }
});
