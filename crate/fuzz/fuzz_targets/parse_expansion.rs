#![no_main]
use cpcboard_core::parse_expansion;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = parse_expansion(text) {
        assert_eq!(parse_expansion(&state.to_string()).unwrap(), state);
    }
});
