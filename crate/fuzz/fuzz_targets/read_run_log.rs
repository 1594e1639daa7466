#![no_main]
use cpcboard_core::{read_run_log, write_run_log};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(snapshot) = read_run_log(&text) {
        let rewritten = write_run_log(&snapshot);
        assert_eq!(
            read_run_log(&rewritten).expect("rewritten log parses"),
            snapshot
        );
    }
});
