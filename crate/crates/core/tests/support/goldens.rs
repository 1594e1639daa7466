//! Pinned SVG renderings and the pinned seed-42 log.

use std::path::PathBuf;

use cpcboard_core::{export_svg, parse_expansion, run_search, SearchConfig, SearchSpace};

pub const WIDTH: u32 = 1200;
pub const HEIGHT: u32 = 600;

/// `(file stem, seed, expansion)` on the bundled space.
pub const SVG_CASES: [(&str, u64, &str); 3] = [
    ("seed42_collapsed", 42, ""),
    ("seed42_srp", 42, "Transformer 2:Sparse Random Projection"),
    (
        "seed7_pca_qda",
        7,
        "Transformer 1:Principal Component Analysis,Estimator:Quadratic Discriminant Analysis",
    ),
];

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

pub fn render(seed: u64, expanded: &str) -> String {
    let snap = run_search(
        &SearchSpace::bundled_default(),
        &SearchConfig::with_seed(seed),
        |_| {},
    )
    .unwrap();
    export_svg(&snap, &parse_expansion(expanded).unwrap(), WIDTH, HEIGHT).unwrap()
}

/// `(paths, axis lines)` counted with an XML parser.
pub fn element_counts(svg: &str) -> (usize, usize) {
    let doc = roxmltree::Document::parse(svg).unwrap();
    let count = |tag: &str| {
        doc.descendants()
            .filter(|n| n.tag_name().name() == tag)
            .count()
    };
    (count("path"), count("line"))
}
