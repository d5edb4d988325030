#![no_main]

use libfuzzer_sys::fuzz_target;
use vbi_core::measurement::Measurements;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = Measurements::read_csv(data) {
        assert!(m.dt > 0.0 && m.dt.is_finite());
        assert_eq!(m.x1.len(), m.acc[0].len());
    }
});
