//! Deterministic SVG rendering of the CPC view with its leaderboard.
//!
//! Output depends only on the inputs: attributes are written in sorted
//! order and every coordinate with six decimals.

use std::fmt::Write as _;

use crate::analytics::leaderboard;
use crate::layout::{compute_layout, AxisDomain, AxisKind, CpcLayout, ExpansionState, LayoutError};
use crate::search::RunSnapshot;

/// Shared with the browser UI.
pub const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

const MARGIN_X: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const PLOT_SHARE: f64 = 0.55;
const ROW_HEIGHT: f64 = 14.0;
const TABLE_COLUMNS: [(&str, f64); 6] = [
    ("Rank", 10.0),
    ("ROC AUC", 50.0),
    ("Group Disparity", 120.0),
    ("Prediction Time", 230.0),
    ("ID", 340.0),
    ("Steps", 390.0),
];

pub fn palette_color(color_index: usize) -> &'static str {
    PALETTE[color_index % PALETTE.len()]
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Writer {
    out: String,
}

impl Writer {
    fn element(
        &mut self,
        indent: usize,
        name: &str,
        mut attrs: Vec<(&str, String)>,
        text: Option<&str>,
    ) {
        attrs.sort_by(|a, b| a.0.cmp(b.0));
        let _ = write!(self.out, "{:indent$}<{name}", "", indent = indent);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape(&v));
        }
        match text {
            Some(t) => {
                let _ = writeln!(self.out, ">{}</{name}>", escape(t));
            }
            None => self.out.push_str("/>\n"),
        }
    }

    fn open(&mut self, indent: usize, name: &str, mut attrs: Vec<(&str, String)>) {
        attrs.sort_by(|a, b| a.0.cmp(b.0));
        let _ = write!(self.out, "{:indent$}<{name}", "", indent = indent);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape(&v));
        }
        self.out.push_str(">\n");
    }

    fn close(&mut self, indent: usize, name: &str) {
        let _ = writeln!(self.out, "{:indent$}</{name}>", "", indent = indent);
    }
}

/// Renders the layout of `snapshot` under `expansion`.
pub fn export_svg(
    snapshot: &RunSnapshot,
    expansion: &ExpansionState,
    width: u32,
    height: u32,
) -> Result<String, LayoutError> {
    let layout = compute_layout(snapshot, expansion)?;
    Ok(render_layout(snapshot, &layout, width, height))
}

pub fn render_layout(
    snapshot: &RunSnapshot,
    layout: &CpcLayout,
    width: u32,
    height: u32,
) -> String {
    let (w, h) = (f64::from(width), f64::from(height));
    let x0 = MARGIN_X.min(w / 4.0);
    let x1 = (w - x0).max(x0);
    let top = MARGIN_TOP.min(h / 10.0);
    let bottom = (h * PLOT_SHARE).max(top);
    let px = |x: f64| x0 + x * (x1 - x0);
    let py = |y: f64| bottom - y * (bottom - top);

    let mut svg = Writer { out: String::new() };
    svg.out
        .push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.open(
        0,
        "svg",
        vec![
            ("xmlns", "http://www.w3.org/2000/svg".into()),
            ("width", width.to_string()),
            ("height", height.to_string()),
            ("viewBox", format!("0 0 {width} {height}")),
            ("font-family", "sans-serif".into()),
        ],
    );
    svg.element(
        1,
        "rect",
        vec![
            ("x", "0".into()),
            ("y", "0".into()),
            ("width", width.to_string()),
            ("height", height.to_string()),
            ("fill", "#ffffff".into()),
        ],
        None,
    );

    svg.open(1, "g", vec![("class", "pipelines".into())]);
    for line in &layout.polylines {
        let mut d = String::new();
        for (i, v) in line.vertices.iter().enumerate() {
            let _ = write!(
                d,
                "{}{} {}",
                if i == 0 { "M" } else { " L" },
                num(px(v[0])),
                num(py(v[1]))
            );
        }
        svg.element(
            2,
            "path",
            vec![
                ("class", "pipeline".into()),
                ("data-id", line.pipeline_id.clone()),
                ("d", d),
                ("fill", "none".into()),
                ("stroke", palette_color(line.color_index).into()),
                ("stroke-opacity", "0.8".into()),
                ("stroke-width", "1.5".into()),
            ],
            None,
        );
    }
    svg.close(1, "g");

    svg.open(1, "g", vec![("class", "axes".into())]);
    for axis in &layout.axes {
        let x = num(px(axis.x));
        let class = if axis.parent.is_some() {
            "axis conditional"
        } else {
            "axis"
        };
        svg.element(
            2,
            "line",
            vec![
                ("class", class.into()),
                ("x1", x.clone()),
                ("x2", x.clone()),
                ("y1", num(py(0.0))),
                ("y2", num(py(1.0))),
                ("stroke", "#333333".into()),
                ("stroke-width", "1".into()),
            ],
            None,
        );
        svg.element(
            2,
            "text",
            vec![
                ("class", "axis-label".into()),
                ("x", x.clone()),
                ("y", num(top - 12.0)),
                ("font-size", "11".into()),
                ("text-anchor", "middle".into()),
            ],
            Some(&axis.label),
        );
        match &axis.domain {
            AxisDomain::Categories { .. } if axis.kind == AxisKind::Categorical => {
                for tick in layout.ticks.get(&axis.axis_id).into_iter().flatten() {
                    svg.element(
                        2,
                        "text",
                        vec![
                            ("class", "tick".into()),
                            ("x", num(px(axis.x) + 4.0)),
                            ("y", num(py(tick.y) + 3.0)),
                            ("font-size", "9".into()),
                        ],
                        Some(&tick.category),
                    );
                }
            }
            AxisDomain::Numeric { lo, hi, .. } => {
                for (value, y) in [(lo, 0.0), (hi, 1.0)] {
                    svg.element(
                        2,
                        "text",
                        vec![
                            ("class", "extent".into()),
                            ("x", num(px(axis.x) + 4.0)),
                            ("y", num(py(y) + 3.0)),
                            ("font-size", "9".into()),
                        ],
                        Some(&format!("{value:.4}")),
                    );
                }
            }
            AxisDomain::Categories { .. } => {}
        }
    }
    svg.close(1, "g");

    let table_top = bottom + 40.0;
    svg.open(1, "g", vec![("class", "leaderboard".into())]);
    for (label, x) in TABLE_COLUMNS {
        svg.element(
            2,
            "text",
            vec![
                ("class", "leaderboard-header".into()),
                ("x", num(x)),
                ("y", num(table_top)),
                ("font-size", "10".into()),
                ("font-weight", "bold".into()),
            ],
            Some(label),
        );
    }
    let capacity = ((h - table_top - 4.0) / ROW_HEIGHT).floor().max(0.0) as usize;
    for (i, row) in leaderboard(snapshot).iter().take(capacity).enumerate() {
        let y = num(table_top + ROW_HEIGHT * (i as f64 + 1.0));
        let steps = row
            .structure
            .values()
            .cloned()
            .collect::<Vec<_>>()
            .join(" > ");
        let cells = [
            row.rank.to_string(),
            format!("{:.3}", row.roc_auc_holdout),
            format!("{:.3}", row.group_disparity),
            format!("{:.4}s", row.prediction_time),
            row.id.clone(),
            steps,
        ];
        svg.open(
            2,
            "g",
            vec![
                ("class", "leaderboard-row".into()),
                ("data-id", row.id.clone()),
                ("fill", palette_color(row.color_index).into()),
            ],
        );
        for ((_, x), cell) in TABLE_COLUMNS.iter().zip(&cells) {
            svg.element(
                3,
                "text",
                vec![("x", num(*x)), ("y", y.clone()), ("font-size", "10".into())],
                Some(cell),
            );
        }
        svg.close(2, "g");
    }
    svg.close(1, "g");
    svg.close(0, "svg");
    svg.out
}
