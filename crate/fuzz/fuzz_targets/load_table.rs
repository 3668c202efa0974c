#![no_main]

use gridcat::table::{load_table, save_table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = load_table(text) {
        // canonical form reloads to the same table
        let canon = save_table(&table);
        assert_eq!(load_table(&canon).unwrap(), table);
    }
});
