#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = tailwave_core::io::read_custom_table(data) {
        assert!(table.len() >= 2);
        assert!(table.windows(2).all(|w| w[0].0 < w[1].0));
    }
});
