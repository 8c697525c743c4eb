#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::typology::{read_typology, write_typology};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_typology(data) {
        let mut out = Vec::new();
        write_typology(&rows, &mut out).unwrap();
        let again = read_typology(out.as_slice()).expect("written typology parses");
        assert_eq!(again, rows);
    }
});
