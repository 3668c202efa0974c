#![no_main]

use gridcat::extension::ExtensionMode;
use gridcat::oracle::parse_schemes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_schemes(text);
    if let Ok(mode) = text.parse::<ExtensionMode>() {
        assert_eq!(mode.to_string().parse::<ExtensionMode>().unwrap(), mode);
    }
});
