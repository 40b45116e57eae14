#![no_main]

use libfuzzer_sys::fuzz_target;
use recaudit::datamodel::{parse_str, write_csv, LogFormat, ParseOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let opts = ParseOptions::default();
    if let Ok(dataset) = parse_str(text, LogFormat::Csv, &opts) {
        // anything accepted must survive a write/parse cycle unchanged
        let mut out = Vec::new();
        write_csv(&dataset, &mut out).unwrap();
        let again = parse_str(std::str::from_utf8(&out).unwrap(), LogFormat::Csv, &opts).unwrap();
        assert_eq!(dataset, again);
    }
});
