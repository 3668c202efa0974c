#![no_main]

use gridcat::oracle::ParamRange;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = text.parse::<ParamRange>() {
        assert!(r.lo >= 1 && r.lo <= r.hi);
    }
});
