//! Leaderboard and read-only queries over a run snapshot.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::layout::color_for;
use crate::metric::{Metric, UnknownMetric};
use crate::search::{satisfies, RunSnapshot};
use crate::search_space::{ConstraintSpec, Role, SearchSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("unknown pipeline `{0}`")]
    UnknownPipeline(String),
    #[error(transparent)]
    UnknownMetric(#[from] UnknownMetric),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("snapshot has no candidates")]
    EmptySnapshot,
    #[error("`{component}` is used by {found} candidates, need at least 2")]
    InsufficientData { component: String, found: usize },
    #[error("unknown query `{0}`")]
    UnknownQuery(String),
    #[error("bad parameter `{name}`: {message}")]
    BadParameter { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub id: String,
    pub seq: u64,
    pub roc_auc_holdout: f64,
    pub group_disparity: f64,
    pub prediction_time: f64,
    pub structure: IndexMap<String, String>,
    pub color_index: usize,
}

/// Rows sorted by holdout ROC AUC descending, ties broken by lower seq.
pub fn leaderboard(snapshot: &RunSnapshot) -> Vec<LeaderboardRow> {
    let mut order: Vec<&_> = snapshot.candidates.iter().collect();
    order.sort_by(|a, b| {
        b.metrics
            .roc_auc_holdout
            .total_cmp(&a.metrics.roc_auc_holdout)
            .then(a.seq.cmp(&b.seq))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, c)| LeaderboardRow {
            rank: i + 1,
            id: c.id.clone(),
            seq: c.seq,
            roc_auc_holdout: c.metrics.roc_auc_holdout,
            group_disparity: c.metrics.group_disparity,
            prediction_time: c.metrics.prediction_time,
            structure: c.structure.clone(),
            color_index: color_for(c.estimator(), &snapshot.space).unwrap_or(0),
        })
        .collect()
}

pub fn count_pipelines(snapshot: &RunSnapshot) -> usize {
    snapshot.candidates.len()
}

pub fn count_steps(space: &SearchSpace) -> usize {
    space.slots.len()
}

/// Number of distinct components that actually appear on `slot`.
pub fn distinct_components(snapshot: &RunSnapshot, slot: &str) -> Result<usize, QueryError> {
    if snapshot.space.slot(slot).is_none() {
        return Err(QueryError::UnknownSlot(slot.to_string()));
    }
    let mut seen: Vec<&str> = snapshot
        .candidates
        .iter()
        .filter_map(|c| c.structure.get(slot).map(String::as_str))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    Ok(seen.len())
}

pub fn metric_of(
    snapshot: &RunSnapshot,
    pipeline_id: &str,
    metric: &str,
) -> Result<f64, QueryError> {
    let candidate = snapshot
        .candidate(pipeline_id)
        .ok_or_else(|| QueryError::UnknownPipeline(pipeline_id.to_string()))?;
    let metric: Metric = metric.parse()?;
    Ok(candidate.metrics.get(metric))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

/// Estimator with the best aggregated value of `metric`.
///
/// "Best" follows the metric's direction: highest ROC AUC, lowest disparity
/// or latency. Ties go to the estimator whose deciding candidate (max) or
/// first candidate (mean) has the lower seq.
pub fn best_estimator(
    snapshot: &RunSnapshot,
    metric: Metric,
    aggregation: Aggregation,
) -> Result<String, QueryError> {
    // estimator -> (aggregate, tie-break seq, sum, count)
    let mut groups: IndexMap<&str, (f64, u64, f64, usize)> = IndexMap::new();
    let sign = if metric.higher_is_better() { 1.0 } else { -1.0 };
    for c in &snapshot.candidates {
        let v = sign * c.metrics.get(metric);
        let entry = groups.entry(c.estimator()).or_insert((v, c.seq, 0.0, 0));
        if v > entry.0 && aggregation == Aggregation::Max {
            entry.0 = v;
            entry.1 = c.seq;
        }
        entry.2 += v;
        entry.3 += 1;
    }
    groups
        .into_iter()
        .map(|(name, (max, seq, sum, n))| {
            let score = match aggregation {
                Aggregation::Max => max,
                Aggregation::Mean => sum / n as f64,
            };
            (name, score, seq)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|(name, _, _)| name.to_string())
        .ok_or(QueryError::EmptySnapshot)
}

/// Ids, in seq order, of candidates meeting every constraint.
pub fn constrained_pipelines(
    snapshot: &RunSnapshot,
    constraints: &[ConstraintSpec],
) -> Vec<String> {
    snapshot
        .candidates
        .iter()
        .filter(|c| satisfies(c, constraints))
        .map(|c| c.id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub component: String,
    pub count: usize,
}

/// Occurrences of each component over all slots with `role`, most frequent
/// first, ties in declaration order. Components never used are omitted.
pub fn component_frequency(snapshot: &RunSnapshot, role: Role) -> Vec<ComponentCount> {
    let slots: Vec<&str> = snapshot
        .space
        .slots
        .iter()
        .filter(|s| s.role == role)
        .map(|s| s.name.as_str())
        .collect();
    let mut counts: IndexMap<&str, usize> = IndexMap::new();
    for slot in snapshot.space.slots.iter().filter(|s| s.role == role) {
        for comp in &slot.components {
            counts.entry(comp.name.as_str()).or_insert(0);
        }
    }
    for c in &snapshot.candidates {
        for slot in &slots {
            if let Some(name) = c.structure.get(*slot) {
                *counts.entry(name.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<ComponentCount> = counts
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .map(|(name, count)| ComponentCount {
            component: name.to_string(),
            count,
        })
        .collect();
    // stable sort keeps declaration order among equal counts
    out.sort_by(|a, b| b.count.cmp(&a.count));
    out
}

pub fn hyperparameter_count(space: &SearchSpace, component: &str) -> Result<usize, QueryError> {
    space
        .find_component(component)
        .map(|c| c.hyperparameters.len())
        .ok_or_else(|| QueryError::UnknownComponent(component.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterInfluence {
    pub hyperparameter: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub component: String,
    pub metric: Metric,
    /// Number of `(candidate, slot)` uses the scores are computed over.
    pub observations: usize,
    pub scores: Vec<HyperparameterInfluence>,
    pub winner: Option<String>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Exact test; a rounded mean leaves residue in the sum of squares.
fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Scores this close to the best count as tied with it; perfectly collinear
/// hyperparameters otherwise split on rounding noise.
pub const SCORE_TIE: f64 = 1e-12;

/// |Pearson r|, 0 when either side has zero variance.
fn abs_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    if is_constant(xs) || is_constant(ys) {
        return 0.0;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).abs().min(1.0)
}

/// Between-group over total sum of squares, 0 when the total is 0.
fn variance_ratio(groups: &[usize], ys: &[f64]) -> f64 {
    let my = mean(ys);
    if is_constant(ys) {
        return 0.0;
    }
    let total: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let mut by_group: HashMap<usize, (f64, usize)> = HashMap::new();
    for (&g, &y) in groups.iter().zip(ys) {
        let e = by_group.entry(g).or_insert((0.0, 0));
        e.0 += y;
        e.1 += 1;
    }
    let mut keys: Vec<usize> = by_group.keys().copied().collect();
    keys.sort_unstable();
    let between: f64 = keys
        .iter()
        .map(|k| {
            let (sum, n) = by_group[k];
            let d = sum / n as f64 - my;
            n as f64 * d * d
        })
        .sum();
    (between / total).clamp(0.0, 1.0)
}

/// How strongly each hyperparameter of `component` tracks `metric`.
///
/// Numeric hyperparameters score `|r|` between their normalized value and the
/// metric; categorical and boolean ones score the between-group share of the
/// metric's variance. Observations are all `(candidate, slot)` pairs where the
/// component is used, restricted to `slot` when given.
pub fn influence(
    snapshot: &RunSnapshot,
    component: &str,
    slot: Option<&str>,
    metric: Metric,
) -> Result<InfluenceReport, QueryError> {
    let space = &snapshot.space;
    if let Some(s) = slot {
        let Some(step) = space.slot(s) else {
            return Err(QueryError::UnknownSlot(s.to_string()));
        };
        if step.component(component).is_none() {
            return Err(QueryError::UnknownComponent(component.to_string()));
        }
    }
    let spec = space
        .find_component(component)
        .ok_or_else(|| QueryError::UnknownComponent(component.to_string()))?;

    let mut rows = Vec::new();
    for c in &snapshot.candidates {
        for (slot_name, used) in &c.structure {
            if used != component || slot.is_some_and(|s| s != slot_name) {
                continue;
            }
            rows.push((c.assignment.get(slot_name), c.metrics.get(metric)));
        }
    }
    if rows.len() < 2 {
        return Err(QueryError::InsufficientData {
            component: component.to_string(),
            found: rows.len(),
        });
    }
    let ys: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
    let scores: Vec<HyperparameterInfluence> = spec
        .hyperparameters
        .iter()
        .map(|hp| {
            let score = if hp.kind.is_numeric() {
                let xs: Vec<f64> = rows
                    .iter()
                    .map(|(v, _)| {
                        v.and_then(|m| m.get(&hp.name))
                            .and_then(|x| hp.kind.unit_position(x))
                            .unwrap_or(0.0)
                    })
                    .collect();
                abs_correlation(&xs, &ys)
            } else {
                let groups: Vec<usize> = rows
                    .iter()
                    .map(|(v, _)| {
                        v.and_then(|m| m.get(&hp.name))
                            .and_then(|x| hp.kind.category_index(x))
                            .unwrap_or(0)
                    })
                    .collect();
                variance_ratio(&groups, &ys)
            };
            HyperparameterInfluence {
                hyperparameter: hp.name.clone(),
                score,
            }
        })
        .collect();
    let top = scores
        .iter()
        .map(|s| s.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let winner = scores
        .iter()
        .find(|s| s.score >= top - SCORE_TIE)
        .map(|s| s.hyperparameter.clone());
    Ok(InfluenceReport {
        component: component.to_string(),
        metric,
        observations: rows.len(),
        scores,
        winner,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub best: f64,
    pub worst: f64,
    pub difference: f64,
}

/// Maximum, minimum and their difference.
pub fn metric_spread(snapshot: &RunSnapshot, metric: Metric) -> Result<Spread, QueryError> {
    let mut values = snapshot.candidates.iter().map(|c| c.metrics.get(metric));
    let first = values.next().ok_or(QueryError::EmptySnapshot)?;
    let (worst, best) = values.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(Spread {
        best,
        worst,
        difference: best - worst,
    })
}
