#![no_main]

use libfuzzer_sys::fuzz_target;
use vbi_core::experiment::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ExperimentConfig::from_json(text) else {
        return;
    };
    if cfg.validate().is_ok() {
        let json = cfg.to_json().expect("serialize valid config");
        let again = ExperimentConfig::from_json(&json).expect("re-read serialized config");
        assert_eq!(again.to_json().unwrap(), json);
    }
});
