#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::typology::read_silhouettes;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_silhouettes(data) {
        assert!(rows.iter().all(|&(_, s)| (-1.0..=1.0).contains(&s)));
    }
});
