#![no_main]

use libfuzzer_sys::fuzz_target;
use recaudit::datamodel::AnalysisWindow;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(window) = text.parse::<AnalysisWindow>() {
        assert_eq!(window.to_string().parse::<AnalysisWindow>().unwrap(), window);
        if let Ok(range) = window.resolve(150) {
            assert!(*range.start() >= 1 && range.start() <= range.end() && *range.end() <= 150);
        }
    }
});
