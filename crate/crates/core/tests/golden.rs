//! Byte-for-byte pins. Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod support;

use cpcboard_core::{
    compute_layout, parse_expansion, run_search, write_run_log, SearchConfig, SearchSpace,
};
use support::goldens;

fn check(name: &str, actual: &str) {
    let path = goldens::dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from the committed golden"
    );
}

#[test]
fn svg_goldens() {
    let space = SearchSpace::bundled_default();
    for (stem, seed, expanded) in goldens::SVG_CASES {
        let svg = goldens::render(seed, expanded);
        check(&format!("{stem}.svg"), &svg);
        let snap = run_search(&space, &SearchConfig::with_seed(seed), |_| {}).unwrap();
        let layout = compute_layout(&snap, &parse_expansion(expanded).unwrap()).unwrap();
        assert_eq!(
            goldens::element_counts(&svg),
            (snap.candidates.len(), layout.axes.len())
        );
    }
}

#[test]
fn seed42_log_golden() {
    let snap = run_search(
        &SearchSpace::bundled_default(),
        &SearchConfig::with_seed(42),
        |_| {},
    )
    .unwrap();
    check("seed42.jsonl", &write_run_log(&snap));
}
