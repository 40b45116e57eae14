#![no_main]

use libfuzzer_sys::fuzz_target;
use recaudit::datamodel::{parse_str, write_jsonl, LogFormat, ParseOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let opts = ParseOptions::default();
    if let Ok(dataset) = parse_str(text, LogFormat::JsonLines, &opts) {
        // anything accepted must survive a write/parse cycle unchanged
        let mut out = Vec::new();
        write_jsonl(&dataset, &mut out).unwrap();
        let again = parse_str(std::str::from_utf8(&out).unwrap(), LogFormat::JsonLines, &opts).unwrap();
        assert_eq!(dataset, again);
    }
});
