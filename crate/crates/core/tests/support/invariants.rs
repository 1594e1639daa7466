//! Invariant checks returning the list of violations found.

use cpcboard_core::layout::{normalize, AxisDomain, AxisKind, AxisValue};
use cpcboard_core::rng::SplitMix64;
use cpcboard_core::{compute_layout, leaderboard, toggle, ExpansionState, RunSnapshot};

/// Expands each slot with probability 0.6, picking a component uniformly.
pub fn random_expansion(snap: &RunSnapshot, seed: u64) -> ExpansionState {
    let mut rng = SplitMix64::from_state(seed);
    let mut state = ExpansionState::new();
    for slot in &snap.space.slots {
        if rng.chance(0.6) {
            let c = &slot.components[rng.below(slot.components.len() as u64) as usize];
            state = toggle(&state, &snap.space, &slot.name, &c.name).unwrap();
        }
    }
    state
}

/// Unit-square bounds, strictly increasing axis x, the vertex-count law,
/// collapse-after-expand and normalize monotonicity at `samples` points per
/// numeric axis.
pub fn layout_violations(
    snap: &RunSnapshot,
    expansion: &ExpansionState,
    samples: usize,
    seed: u64,
) -> Vec<String> {
    let mut out = Vec::new();
    let layout = match compute_layout(snap, expansion) {
        Ok(l) => l,
        Err(e) => return vec![format!("layout failed: {e}")],
    };
    let axes = &layout.axes;
    for pair in axes.windows(2) {
        if pair[0].x >= pair[1].x {
            out.push(format!("x not increasing at {}", pair[1].axis_id));
        }
    }
    if layout.polylines.len() != snap.candidates.len() {
        out.push("polyline count differs from candidate count".into());
    }
    for (line, cand) in layout.polylines.iter().zip(&snap.candidates) {
        if line.pipeline_id != cand.id {
            out.push(format!("polyline {} out of order", line.pipeline_id));
        }
        for v in &line.vertices {
            if !((0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[1])) {
                out.push(format!("{} vertex {v:?} outside the unit square", cand.id));
            }
        }
        let expected = axes
            .iter()
            .filter(|a| match &a.parent {
                None => true,
                Some(p) => cand.structure.get(&p.slot) == Some(&p.component),
            })
            .count();
        if line.vertices.len() != expected {
            out.push(format!(
                "{} has {} vertices, expected {expected}",
                cand.id,
                line.vertices.len()
            ));
        }
    }

    let pairs: Vec<(String, String)> = expansion
        .pairs()
        .map(|(s, c)| (s.to_string(), c.to_string()))
        .collect();
    let mut collapsed = expansion.clone();
    for (slot, component) in &pairs {
        collapsed = toggle(&collapsed, &snap.space, slot, component).unwrap();
    }
    let never = compute_layout(snap, &ExpansionState::new()).unwrap();
    if !collapsed.is_empty() || compute_layout(snap, &collapsed).unwrap() != never {
        out.push("collapse after expand differs from never expanded".into());
    }

    let mut rng = SplitMix64::from_state(seed);
    for axis in axes.iter().filter(|a| a.kind == AxisKind::Numeric) {
        let AxisDomain::Numeric { lo, hi, .. } = axis.domain else {
            out.push(format!("{} numeric without numeric domain", axis.axis_id));
            continue;
        };
        let mut points: Vec<f64> = (0..samples).map(|_| rng.uniform(lo, hi)).collect();
        points.extend([lo, hi]);
        points.sort_by(f64::total_cmp);
        let ys: Vec<f64> = points
            .iter()
            .map(|p| normalize(AxisValue::Number(p.clamp(lo, hi)), axis).unwrap_or(f64::NAN))
            .collect();
        if ys.windows(2).any(|w| !(w[0] <= w[1])) {
            out.push(format!("{} not monotone", axis.axis_id));
        }
    }
    out
}

/// Descending holdout AUC, dense 1-based ranks, seq tie-break and the
/// permutation property, all checked pairwise.
pub fn leaderboard_violations(snap: &RunSnapshot) -> Vec<String> {
    let mut out = Vec::new();
    let rows = leaderboard(snap);
    for (i, row) in rows.iter().enumerate() {
        if row.rank != i + 1 {
            out.push(format!("row {i} has rank {}", row.rank));
        }
    }
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ordered = a.roc_auc_holdout > b.roc_auc_holdout
            || (a.roc_auc_holdout == b.roc_auc_holdout && a.seq < b.seq);
        if !ordered {
            out.push(format!("{} before {} breaks the order", a.id, b.id));
        }
    }
    let mut ids: Vec<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    let mut want: Vec<&str> = snap.candidates.iter().map(|c| c.id.as_str()).collect();
    ids.sort_unstable();
    want.sort_unstable();
    if ids != want {
        out.push("leaderboard is not a permutation of the candidates".into());
    }
    out
}
