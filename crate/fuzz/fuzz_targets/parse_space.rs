#![no_main]
use cpcboard_core::{parse_space, serialize_space};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Errors are fine; accepted spaces must round-trip.
    if let Ok(space) = parse_space(text) {
        let again = parse_space(&serialize_space(&space)).expect("serialized space parses");
        assert_eq!(again, space);
    }
});
