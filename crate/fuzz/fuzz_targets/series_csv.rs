#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((_, series)) = tailwave_core::io::read_series(data) {
        assert!(series.iter().all(|(x, y)| x.is_finite() && y.re.is_finite() && y.im.is_finite()));
    }
});
