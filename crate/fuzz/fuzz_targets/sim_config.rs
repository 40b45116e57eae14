#![no_main]

use libfuzzer_sys::fuzz_target;
use recaudit::simulator::SimConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = SimConfig::from_json(text) {
            cfg.validate().unwrap();
        }
    }
});
