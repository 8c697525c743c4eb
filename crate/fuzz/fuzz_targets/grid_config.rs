#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_bench_core::sweep::{default_grid, ConfigFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ConfigFile::parse(text) {
        if let Ok(grid) = config.grid_over(default_grid()) {
            grid.validate().expect("grid_over returns a valid grid");
        }
    }
});
