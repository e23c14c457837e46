#![no_main]

use libfuzzer_sys::fuzz_target;
use reccone::io::{parse_result, write_result};

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = parse_result(data) {
        let bytes = write_result(&r);
        let back = parse_result(&bytes).expect("canonical output parses");
        assert_eq!(write_result(&back), bytes);
    }
});
