//! Conditional parallel coordinates geometry.
//!
//! Top-level axes show the pipeline id, one categorical axis per step slot
//! and the four metrics. Expanding a `(slot, component)` pair inserts one
//! conditional axis per hyperparameter of that component directly after the
//! slot axis. All coordinates are in the unit square with y pointing up.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::metric::Metric;
use crate::search::{PipelineCandidate, RunSnapshot};
use crate::search_space::{HyperparameterKind, Scale, SearchSpace, Value};

pub const PIPELINE_ID_AXIS: &str = "pipeline_id";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("snapshot has no candidates")]
    EmptySnapshot,
    #[error("cannot expand `{component}` on slot `{slot}`")]
    UnknownExpansion { slot: String, component: String },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("value {value} outside the domain of axis `{axis}`")]
    Domain { axis: String, value: String },
    #[error("malformed expansion list: {0}")]
    ExpansionSyntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Identifier,
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AxisDomain {
    Categories { categories: Vec<String> },
    Numeric { lo: f64, hi: f64, scale: Scale },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisParent {
    pub slot: String,
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDescriptor {
    pub axis_id: String,
    pub label: String,
    pub kind: AxisKind,
    pub parent: Option<AxisParent>,
    pub domain: AxisDomain,
    pub x: f64,
}

/// A value placed on an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue<'a> {
    Category(&'a str),
    Number(f64),
    Bool(bool),
}

impl fmt::Display for AxisValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Category(s) => f.write_str(s),
            AxisValue::Number(x) => write!(f, "{x}"),
            AxisValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl<'a> From<&'a Value> for AxisValue<'a> {
    fn from(v: &'a Value) -> Self {
        match v {
            Value::Bool(b) => AxisValue::Bool(*b),
            Value::Int(i) => AxisValue::Number(*i as f64),
            Value::Real(x) => AxisValue::Number(*x),
            Value::Text(s) => AxisValue::Category(s),
        }
    }
}

/// Expanded components, at most one per slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ExpansionState {
    expanded: BTreeMap<String, String>,
}

impl ExpansionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded.is_empty()
    }

    pub fn len(&self) -> usize {
        self.expanded.len()
    }

    pub fn expanded_in(&self, slot: &str) -> Option<&str> {
        self.expanded.get(slot).map(String::as_str)
    }

    pub fn contains(&self, slot: &str, component: &str) -> bool {
        self.expanded_in(slot) == Some(component)
    }

    /// `(slot, component)` pairs ordered by slot name.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.expanded.iter().map(|(s, c)| (s.as_str(), c.as_str()))
    }

    /// Checks every pair against the space.
    pub fn validate(&self, space: &SearchSpace) -> Result<(), LayoutError> {
        for (slot, component) in self.pairs() {
            check_pair(space, slot, component)?;
        }
        Ok(())
    }
}

impl fmt::Display for ExpansionState {
    /// `slot:component(,slot:component)*`, the query-string form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (slot, component)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{slot}:{component}")?;
        }
        Ok(())
    }
}

impl FromStr for ExpansionState {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expansion(s)
    }
}

/// Parses `slot:component(,slot:component)*`. The empty string is the empty
/// state. A slot may appear only once.
pub fn parse_expansion(text: &str) -> Result<ExpansionState, LayoutError> {
    let mut state = ExpansionState::new();
    if text.is_empty() {
        return Ok(state);
    }
    for item in text.split(',') {
        let (slot, component) = item.split_once(':').ok_or_else(|| {
            LayoutError::ExpansionSyntax(format!("`{item}` is not slot:component"))
        })?;
        if slot.is_empty() || component.is_empty() || component.contains(':') {
            return Err(LayoutError::ExpansionSyntax(format!(
                "`{item}` is not slot:component"
            )));
        }
        if state
            .expanded
            .insert(slot.to_string(), component.to_string())
            .is_some()
        {
            return Err(LayoutError::ExpansionSyntax(format!(
                "slot `{slot}` expanded more than once"
            )));
        }
    }
    Ok(state)
}

fn check_pair(space: &SearchSpace, slot: &str, component: &str) -> Result<(), LayoutError> {
    match space.slot(slot).and_then(|s| s.component(component)) {
        Some(_) => Ok(()),
        None => Err(LayoutError::UnknownExpansion {
            slot: slot.to_string(),
            component: component.to_string(),
        }),
    }
}

/// Click semantics: collapse if expanded, replace another expansion on the
/// same slot, otherwise expand.
pub fn toggle(
    state: &ExpansionState,
    space: &SearchSpace,
    slot: &str,
    component: &str,
) -> Result<ExpansionState, LayoutError> {
    check_pair(space, slot, component)?;
    let mut next = state.clone();
    if next.contains(slot, component) {
        next.expanded.remove(slot);
    } else {
        next.expanded
            .insert(slot.to_string(), component.to_string());
    }
    Ok(next)
}

fn metric_domain(candidates: &[PipelineCandidate], metric: Metric) -> AxisDomain {
    let mut values = candidates.iter().map(|c| c.metrics.get(metric));
    let (lo, hi) = match values.next() {
        None => (0.0, 1.0),
        Some(first) => values.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))),
    };
    AxisDomain::Numeric {
        lo,
        hi,
        scale: Scale::Linear,
    }
}

/// Unpositioned top-level axes (x = 0). Metric domains span the observed
/// range of `candidates`.
pub fn top_level_axes(
    space: &SearchSpace,
    candidates: &[PipelineCandidate],
) -> Vec<AxisDescriptor> {
    let mut axes = Vec::with_capacity(space.slots.len() + 5);
    axes.push(AxisDescriptor {
        axis_id: PIPELINE_ID_AXIS.into(),
        label: "Pipeline ID".into(),
        kind: AxisKind::Identifier,
        parent: None,
        domain: AxisDomain::Categories {
            categories: candidates.iter().map(|c| c.id.clone()).collect(),
        },
        x: 0.0,
    });
    for slot in &space.slots {
        axes.push(AxisDescriptor {
            axis_id: slot.name.clone(),
            label: slot.name.clone(),
            kind: AxisKind::Categorical,
            parent: None,
            domain: AxisDomain::Categories {
                categories: slot.components.iter().map(|c| c.name.clone()).collect(),
            },
            x: 0.0,
        });
    }
    for metric in Metric::ALL {
        axes.push(AxisDescriptor {
            axis_id: metric.as_str().into(),
            label: metric.label().into(),
            kind: AxisKind::Numeric,
            parent: None,
            domain: metric_domain(candidates, metric),
            x: 0.0,
        });
    }
    position_axes(axes)
}

fn position_axes(mut axes: Vec<AxisDescriptor>) -> Vec<AxisDescriptor> {
    let m = axes.len();
    for (i, axis) in axes.iter_mut().enumerate() {
        axis.x = if m < 2 {
            0.5
        } else {
            i as f64 / (m - 1) as f64
        };
    }
    axes
}

/// Top-level axes with the conditional axes of every expanded component
/// inserted after their slot axis, all spaced evenly across `[0, 1]`.
pub fn visible_axes(
    space: &SearchSpace,
    candidates: &[PipelineCandidate],
    expansion: &ExpansionState,
) -> Result<Vec<AxisDescriptor>, LayoutError> {
    expansion.validate(space)?;
    let mut axes = Vec::new();
    for axis in top_level_axes(space, candidates) {
        let slot = space
            .slot(&axis.axis_id)
            .filter(|_| axis.kind == AxisKind::Categorical);
        axes.push(axis);
        let Some(slot) = slot else { continue };
        let Some(component) = expansion
            .expanded_in(&slot.name)
            .and_then(|c| slot.component(c))
        else {
            continue;
        };
        for hp in &component.hyperparameters {
            let (kind, domain) = match &hp.kind {
                HyperparameterKind::Integer { min, max } => (
                    AxisKind::Numeric,
                    AxisDomain::Numeric {
                        lo: *min as f64,
                        hi: *max as f64,
                        scale: Scale::Linear,
                    },
                ),
                HyperparameterKind::Real { min, max, scale } => (
                    AxisKind::Numeric,
                    AxisDomain::Numeric {
                        lo: *min,
                        hi: *max,
                        scale: *scale,
                    },
                ),
                other => (
                    AxisKind::Categorical,
                    AxisDomain::Categories {
                        categories: other.categories().unwrap_or_default(),
                    },
                ),
            };
            axes.push(AxisDescriptor {
                axis_id: format!("{}/{}/{}", slot.name, component.name, hp.name),
                label: hp.name.clone(),
                kind,
                parent: Some(AxisParent {
                    slot: slot.name.clone(),
                    component: component.name.clone(),
                }),
                domain,
                x: 0.0,
            });
        }
    }
    Ok(position_axes(axes))
}

/// Maps a value to `[0, 1]` on an axis.
///
/// Linear numeric axes use `(v - lo) / (hi - lo)`, log axes the same in
/// `ln`, degenerate axes 0.5. Category `i` of `k` sits at the band centre
/// `(i + 0.5) / k`; booleans are the categories `false`, `true`.
pub fn normalize(value: AxisValue<'_>, axis: &AxisDescriptor) -> Result<f64, LayoutError> {
    let out_of_domain = || LayoutError::Domain {
        axis: axis.axis_id.clone(),
        value: value.to_string(),
    };
    match (&axis.domain, value) {
        (AxisDomain::Numeric { lo, hi, scale }, AxisValue::Number(v)) => {
            if !v.is_finite() || v < *lo || v > *hi {
                return Err(out_of_domain());
            }
            if lo == hi {
                return Ok(0.5);
            }
            let y = match scale {
                Scale::Linear => (v - lo) / (hi - lo),
                Scale::Log => {
                    if v <= 0.0 || *lo <= 0.0 {
                        return Err(out_of_domain());
                    }
                    (libm::log(v) - libm::log(*lo)) / (libm::log(*hi) - libm::log(*lo))
                }
            };
            Ok(y.clamp(0.0, 1.0))
        }
        (AxisDomain::Categories { categories }, AxisValue::Category(_) | AxisValue::Bool(_)) => {
            let name = match value {
                AxisValue::Bool(b) => {
                    if b {
                        "true"
                    } else {
                        "false"
                    }
                }
                AxisValue::Category(s) => s,
                AxisValue::Number(_) => unreachable!(),
            };
            let i = categories
                .iter()
                .position(|c| c == name)
                .ok_or_else(out_of_domain)?;
            Ok((i as f64 + 0.5) / categories.len() as f64)
        }
        _ => Err(out_of_domain()),
    }
}

/// Index of an estimator in the estimator slot's declared order.
pub fn color_for(estimator: &str, space: &SearchSpace) -> Result<usize, LayoutError> {
    space
        .estimator_slot()
        .and_then(|s| s.component_index(estimator))
        .ok_or_else(|| LayoutError::UnknownComponent(estimator.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub pipeline_id: String,
    pub vertices: Vec<[f64; 2]>,
    pub color_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub category: String,
    pub y: f64,
}

/// Threshold of a search constraint drawn on its metric axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMark {
    pub axis_id: String,
    pub threshold: f64,
    /// Normalized threshold, clamped to `[0, 1]`.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpcLayout {
    pub axes: Vec<AxisDescriptor>,
    pub polylines: Vec<Polyline>,
    pub ticks: IndexMap<String, Vec<Tick>>,
    pub legend: IndexMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraint_marks: Vec<ConstraintMark>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LayoutOptions {
    pub constraint_marks: bool,
}

pub fn compute_layout(
    snapshot: &RunSnapshot,
    expansion: &ExpansionState,
) -> Result<CpcLayout, LayoutError> {
    compute_layout_with(snapshot, expansion, LayoutOptions::default())
}

fn candidate_value<'a>(
    candidate: &'a PipelineCandidate,
    axis: &AxisDescriptor,
) -> Option<AxisValue<'a>> {
    if let Some(parent) = &axis.parent {
        if candidate.structure.get(&parent.slot) != Some(&parent.component) {
            return None;
        }
        let hp = axis.axis_id.rsplit('/').next()?;
        return candidate
            .assignment
            .get(&parent.slot)
            .and_then(|a| a.get(hp))
            .map(AxisValue::from);
    }
    if axis.axis_id == PIPELINE_ID_AXIS {
        return Some(AxisValue::Category(&candidate.id));
    }
    if let Ok(metric) = axis.axis_id.parse::<Metric>() {
        return Some(AxisValue::Number(candidate.metrics.get(metric)));
    }
    candidate
        .structure
        .get(&axis.axis_id)
        .map(|c| AxisValue::Category(c.as_str()))
}

/// Full layout of a snapshot under an expansion state. Pipelines that do not
/// use an expanded component skip its conditional axes.
pub fn compute_layout_with(
    snapshot: &RunSnapshot,
    expansion: &ExpansionState,
    options: LayoutOptions,
) -> Result<CpcLayout, LayoutError> {
    if snapshot.candidates.is_empty() {
        return Err(LayoutError::EmptySnapshot);
    }
    let space = &snapshot.space;
    let axes = visible_axes(space, &snapshot.candidates, expansion)?;

    let polylines = snapshot
        .candidates
        .iter()
        .map(|candidate| {
            let mut vertices = Vec::with_capacity(axes.len());
            for axis in &axes {
                let Some(value) = candidate_value(candidate, axis) else {
                    if axis.parent.is_some() {
                        continue;
                    }
                    return Err(LayoutError::Domain {
                        axis: axis.axis_id.clone(),
                        value: format!("missing on {}", candidate.id),
                    });
                };
                vertices.push([axis.x, normalize(value, axis)?]);
            }
            Ok(Polyline {
                pipeline_id: candidate.id.clone(),
                vertices,
                color_index: color_for(candidate.estimator(), space)?,
            })
        })
        .collect::<Result<Vec<_>, LayoutError>>()?;

    let mut ticks = IndexMap::new();
    for axis in axes.iter().filter(|a| a.kind == AxisKind::Categorical) {
        if let AxisDomain::Categories { categories } = &axis.domain {
            let k = categories.len() as f64;
            ticks.insert(
                axis.axis_id.clone(),
                categories
                    .iter()
                    .enumerate()
                    .map(|(i, c)| Tick {
                        category: c.clone(),
                        y: (i as f64 + 0.5) / k,
                    })
                    .collect(),
            );
        }
    }

    let legend = space
        .estimator_slot()
        .map(|s| {
            s.components
                .iter()
                .enumerate()
                .map(|(i, c)| (c.name.clone(), i))
                .collect()
        })
        .unwrap_or_default();

    let mut constraint_marks = Vec::new();
    if options.constraint_marks {
        for c in &space.constraints {
            let Some(axis) = axes.iter().find(|a| a.axis_id == c.metric.as_str()) else {
                continue;
            };
            let AxisDomain::Numeric { lo, hi, .. } = axis.domain else {
                continue;
            };
            let clamped = c.threshold.max(lo).min(hi);
            constraint_marks.push(ConstraintMark {
                axis_id: axis.axis_id.clone(),
                threshold: c.threshold,
                y: normalize(AxisValue::Number(clamped), axis)?,
            });
        }
    }

    Ok(CpcLayout {
        axes,
        polylines,
        ticks,
        legend,
        constraint_marks,
    })
}
