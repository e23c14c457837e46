#![no_main]

use libfuzzer_sys::fuzz_target;
use reccone::io::{parse_instance, write_instance};

fuzz_target!(|data: &[u8]| {
    // anything accepted must survive a canonical round trip
    if let Ok(f) = parse_instance(data) {
        let bytes = write_instance(&f);
        let back = parse_instance(&bytes).expect("canonical output parses");
        assert_eq!(back, f);
        assert_eq!(write_instance(&back), bytes);
    }
});
