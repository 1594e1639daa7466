#![no_main]
use std::sync::OnceLock;

use cpcboard_core::query::{run_query, QueryParams, QUERY_NAMES};
use cpcboard_core::{run_search, RunSnapshot, SearchConfig, SearchSpace};
use libfuzzer_sys::fuzz_target;

fn snapshot() -> &'static RunSnapshot {
    static SNAP: OnceLock<RunSnapshot> = OnceLock::new();
    SNAP.get_or_init(|| {
        run_search(
            &SearchSpace::bundled_default(),
            &SearchConfig::with_seed(42),
            |_| {},
        )
        .unwrap()
    })
}

// Input: query name index byte, then `key=value` lines.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let params: QueryParams = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let name = QUERY_NAMES[pick as usize % QUERY_NAMES.len()];
    let _ = run_query(snapshot(), name, &params);
});
