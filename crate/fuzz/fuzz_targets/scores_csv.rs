#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::sweep::{read_records, write_records};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_records(data) {
        let mut out = Vec::new();
        write_records(&records, &mut out).unwrap();
        let again = read_records(out.as_slice()).expect("written scores parse");
        assert_eq!(again.len(), records.len());
    }
});
