//! Pipeline search space: ordered step slots, the components available in
//! each slot, their hyperparameters, and the metric constraints of a run.
//!
//! The space is loaded from a JSON space file and is immutable afterwards.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use crate::metric::Metric;

/// Bundled space file mimicking the three-step AutoAI pipeline.
pub const DEFAULT_SPACE_JSON: &str = include_str!("../spaces/default_space.json");

/// Identifiers of the top-level metric and id axes; slot names may not reuse them.
pub const RESERVED_NAMES: [&str; 5] = [
    "pipeline_id",
    "group_disparity",
    "prediction_time",
    "roc_auc_train",
    "roc_auc_holdout",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Transformer,
    Estimator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Transformer => "transformer",
            Role::Estimator => "estimator",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "transformer" => Some(Role::Transformer),
            "estimator" => Some(Role::Estimator),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// A hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HyperparameterKind {
    Categorical(Vec<String>),
    Boolean,
    Integer { min: i64, max: i64 },
    Real { min: f64, max: f64, scale: Scale },
}

impl HyperparameterKind {
    fn tag(&self) -> &'static str {
        match self {
            HyperparameterKind::Categorical(_) => "categorical",
            HyperparameterKind::Boolean => "boolean",
            HyperparameterKind::Integer { .. } => "integer",
            HyperparameterKind::Real { .. } => "real",
        }
    }

    /// Categories in ordinal order for categorical and boolean kinds.
    pub fn categories(&self) -> Option<Vec<String>> {
        match self {
            HyperparameterKind::Categorical(values) => Some(values.clone()),
            HyperparameterKind::Boolean => Some(vec!["false".into(), "true".into()]),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            HyperparameterKind::Integer { .. } | HyperparameterKind::Real { .. }
        )
    }

    /// Whether `value` lies in this domain.
    pub fn admits(&self, value: &Value) -> bool {
        match (self, value) {
            (HyperparameterKind::Categorical(values), Value::Text(s)) => values.contains(s),
            (HyperparameterKind::Boolean, Value::Bool(_)) => true,
            (HyperparameterKind::Integer { min, max }, Value::Int(v)) => min <= v && v <= max,
            (HyperparameterKind::Real { min, max, .. }, Value::Real(v)) => {
                v.is_finite() && *min <= *v && *v <= *max
            }
            _ => false,
        }
    }

    /// Position of a numeric value in `[0, 1]`, log-transformed for log
    /// scale, 0.5 on a one-point range. `None` for non-numeric kinds or values.
    pub fn unit_position(&self, value: &Value) -> Option<f64> {
        match (self, value) {
            (HyperparameterKind::Integer { min, max }, Value::Int(_)) if min == max => Some(0.5),
            (HyperparameterKind::Real { min, max, .. }, Value::Real(_)) if min == max => Some(0.5),
            (HyperparameterKind::Integer { min, max }, Value::Int(v)) => {
                Some((*v - *min) as f64 / (*max - *min) as f64)
            }
            (HyperparameterKind::Real { min, max, scale }, Value::Real(v)) => Some(match scale {
                Scale::Linear => (v - min) / (max - min),
                Scale::Log => {
                    (libm::log(*v) - libm::log(*min)) / (libm::log(*max) - libm::log(*min))
                }
            }),
            _ => None,
        }
    }

    /// Index of a categorical or boolean value among `categories()`.
    pub fn category_index(&self, value: &Value) -> Option<usize> {
        match (self, value) {
            (HyperparameterKind::Categorical(values), Value::Text(s)) => {
                values.iter().position(|v| v == s)
            }
            (HyperparameterKind::Boolean, Value::Bool(b)) => Some(usize::from(*b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterSpec {
    pub name: String,
    pub kind: HyperparameterKind,
    pub default: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub role: Role,
    pub hyperparameters: Vec<HyperparameterSpec>,
}

impl ComponentSpec {
    pub fn hyperparameter(&self, name: &str) -> Option<&HyperparameterSpec> {
        self.hyperparameters.iter().find(|h| h.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSlot {
    pub name: String,
    pub role: Role,
    pub components: Vec<ComponentSpec>,
}

impl StepSlot {
    pub fn component(&self, name: &str) -> Option<&ComponentSpec> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }
}

/// Upper bound `metric <= threshold` on a constrainable metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub metric: Metric,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub slots: Vec<StepSlot>,
    pub constraints: Vec<ConstraintSpec>,
}

/// Per-slot component choice plus hyperparameter assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub structure: IndexMap<String, String>,
    pub assignment: IndexMap<String, IndexMap<String, Value>>,
}

/// One breached invariant, located by a `/`-separated path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid space: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("unknown component `{name}` in slot `{slot}`")]
    UnknownComponent { slot: String, name: String },
    #[error("structure names {got} components but the space has {expected} slots")]
    StructureArity { expected: usize, got: usize },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Why a configuration is not legal for a space.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("illegal configuration at {path}: {message}")]
pub struct IllegalConfiguration {
    pub path: String,
    pub message: String,
}

/// A configuration resolved against its space: component index per slot and
/// hyperparameter values in declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStep<'a> {
    pub component_index: usize,
    pub component: &'a ComponentSpec,
    pub values: Vec<&'a Value>,
}

impl SearchSpace {
    /// The bundled default space.
    pub fn bundled_default() -> SearchSpace {
        parse_space(DEFAULT_SPACE_JSON).expect("bundled space file is valid")
    }

    pub fn slot(&self, name: &str) -> Option<&StepSlot> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }

    pub fn estimator_slot(&self) -> Option<&StepSlot> {
        self.slots.iter().rev().find(|s| s.role == Role::Estimator)
    }

    /// First declaration of a component name, searching slots in order.
    pub fn find_component(&self, name: &str) -> Option<&ComponentSpec> {
        self.slots.iter().find_map(|s| s.component(name))
    }

    pub fn constraint(&self, metric: Metric) -> Option<&ConstraintSpec> {
        self.constraints.iter().find(|c| c.metric == metric)
    }

    /// Checks `config` against the space and returns it resolved by index.
    pub fn resolve<'a>(
        &'a self,
        config: &'a Configuration,
    ) -> Result<Vec<ResolvedStep<'a>>, IllegalConfiguration> {
        let illegal = |path: String, message: String| IllegalConfiguration { path, message };
        if config.structure.len() != self.slots.len() {
            return Err(illegal(
                "/structure".into(),
                format!(
                    "expected {} slots, got {}",
                    self.slots.len(),
                    config.structure.len()
                ),
            ));
        }
        let mut out = Vec::with_capacity(self.slots.len());
        for slot in &self.slots {
            let name = config.structure.get(&slot.name).ok_or_else(|| {
                illegal(format!("/structure/{}", slot.name), "missing slot".into())
            })?;
            let component_index = slot.component_index(name).ok_or_else(|| {
                illegal(
                    format!("/structure/{}", slot.name),
                    format!("unknown component `{name}`"),
                )
            })?;
            let component = &slot.components[component_index];
            // slots whose component has no hyperparameters may omit the assignment
            let assigned = config.assignment.get(&slot.name);
            let count = assigned.map_or(0, IndexMap::len);
            if count != component.hyperparameters.len() {
                return Err(illegal(
                    format!("/assignment/{}", slot.name),
                    format!(
                        "expected {} hyperparameters, got {}",
                        component.hyperparameters.len(),
                        count
                    ),
                ));
            }
            let mut values = Vec::with_capacity(component.hyperparameters.len());
            for hp in &component.hyperparameters {
                let path = format!("/assignment/{}/{}", slot.name, hp.name);
                let v = assigned
                    .and_then(|a| a.get(&hp.name))
                    .ok_or_else(|| illegal(path.clone(), "missing value".into()))?;
                if !hp.kind.admits(v) {
                    return Err(illegal(
                        path,
                        format!("value {v} outside {} domain", hp.kind.tag()),
                    ));
                }
                values.push(v);
            }
            out.push(ResolvedStep {
                component_index,
                component,
                values,
            });
        }
        if config.assignment.len() > self.slots.len()
            || config.assignment.keys().any(|k| self.slot(k).is_none())
        {
            return Err(illegal(
                "/assignment".into(),
                "assignment names an unknown slot".into(),
            ));
        }
        Ok(out)
    }
}

/// Parses and validates a space file.
pub fn parse_space(text: &str) -> Result<SearchSpace, SpaceError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| SpaceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let space = space_from_json(&doc)?;
    let violations = validate_space(&space);
    if violations.is_empty() {
        Ok(space)
    } else {
        Err(SpaceError::Validation(violations))
    }
}

/// Builds a space from an already-parsed JSON document without validating it.
pub fn space_from_json(doc: &Json) -> Result<SearchSpace, SpaceError> {
    let top = as_object(doc, "")?;
    let slots = as_array(field(top, "", "slots")?, "/slots")?
        .iter()
        .enumerate()
        .map(|(i, s)| slot_from_json(s, &format!("/slots/{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let constraints = match top.get("constraints") {
        None => Vec::new(),
        Some(c) => as_array(c, "/constraints")?
            .iter()
            .enumerate()
            .map(|(i, c)| constraint_from_json(c, &format!("/constraints/{i}")))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(SearchSpace { slots, constraints })
}

fn schema(path: &str, message: impl Into<String>) -> SpaceError {
    SpaceError::Schema {
        path: if path.is_empty() {
            "/".into()
        } else {
            path.into()
        },
        message: message.into(),
    }
}

fn as_object<'a>(v: &'a Json, path: &str) -> Result<&'a Map<String, Json>, SpaceError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>, SpaceError> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn field<'a>(obj: &'a Map<String, Json>, path: &str, name: &str) -> Result<&'a Json, SpaceError> {
    obj.get(name)
        .ok_or_else(|| schema(&format!("{path}/{name}"), "missing field"))
}

fn str_field<'a>(
    obj: &'a Map<String, Json>,
    path: &str,
    name: &str,
) -> Result<&'a str, SpaceError> {
    field(obj, path, name)?
        .as_str()
        .ok_or_else(|| schema(&format!("{path}/{name}"), "expected a string"))
}

fn num_field(obj: &Map<String, Json>, path: &str, name: &str) -> Result<f64, SpaceError> {
    field(obj, path, name)?
        .as_f64()
        .ok_or_else(|| schema(&format!("{path}/{name}"), "expected a number"))
}

fn int_field(obj: &Map<String, Json>, path: &str, name: &str) -> Result<i64, SpaceError> {
    field(obj, path, name)?
        .as_i64()
        .ok_or_else(|| schema(&format!("{path}/{name}"), "expected an integer"))
}

fn role_field(obj: &Map<String, Json>, path: &str) -> Result<Role, SpaceError> {
    let s = str_field(obj, path, "role")?;
    Role::parse(s).ok_or_else(|| {
        schema(
            &format!("{path}/role"),
            format!("expected \"transformer\" or \"estimator\", got {s:?}"),
        )
    })
}

fn slot_from_json(v: &Json, path: &str) -> Result<StepSlot, SpaceError> {
    let obj = as_object(v, path)?;
    let components = as_array(
        field(obj, path, "components")?,
        &format!("{path}/components"),
    )?
    .iter()
    .enumerate()
    .map(|(i, c)| component_from_json(c, &format!("{path}/components/{i}")))
    .collect::<Result<Vec<_>, _>>()?;
    Ok(StepSlot {
        name: str_field(obj, path, "name")?.to_string(),
        role: role_field(obj, path)?,
        components,
    })
}

fn component_from_json(v: &Json, path: &str) -> Result<ComponentSpec, SpaceError> {
    let obj = as_object(v, path)?;
    let hyperparameters = match obj.get("hyperparameters") {
        None => Vec::new(),
        Some(h) => as_array(h, &format!("{path}/hyperparameters"))?
            .iter()
            .enumerate()
            .map(|(i, h)| hyperparameter_from_json(h, &format!("{path}/hyperparameters/{i}")))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(ComponentSpec {
        name: str_field(obj, path, "name")?.to_string(),
        role: role_field(obj, path)?,
        hyperparameters,
    })
}

fn hyperparameter_from_json(v: &Json, path: &str) -> Result<HyperparameterSpec, SpaceError> {
    let obj = as_object(v, path)?;
    let name = str_field(obj, path, "name")?.to_string();
    let kind = match str_field(obj, path, "kind")? {
        "categorical" => {
            let values = as_array(field(obj, path, "values")?, &format!("{path}/values"))?
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| schema(&format!("{path}/values/{i}"), "expected a string"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            HyperparameterKind::Categorical(values)
        }
        "boolean" => HyperparameterKind::Boolean,
        "integer" => HyperparameterKind::Integer {
            min: int_field(obj, path, "min")?,
            max: int_field(obj, path, "max")?,
        },
        "real" => {
            let scale = match obj.get("scale").map(|s| s.as_str()) {
                None | Some(Some("linear")) => Scale::Linear,
                Some(Some("log")) => Scale::Log,
                _ => {
                    return Err(schema(
                        &format!("{path}/scale"),
                        "expected \"linear\" or \"log\"",
                    ))
                }
            };
            HyperparameterKind::Real {
                min: num_field(obj, path, "min")?,
                max: num_field(obj, path, "max")?,
                scale,
            }
        }
        other => {
            return Err(schema(
                &format!("{path}/kind"),
                format!("unknown kind {other:?}"),
            ))
        }
    };
    let default = value_for_kind(field(obj, path, "default")?, &kind).ok_or_else(|| {
        schema(
            &format!("{path}/default"),
            format!("expected a {} value", kind.tag()),
        )
    })?;
    Ok(HyperparameterSpec {
        name,
        kind,
        default,
    })
}

/// Reads a JSON value as a hyperparameter value of the given kind. Integer
/// literals are accepted for real hyperparameters.
pub fn value_for_kind(v: &Json, kind: &HyperparameterKind) -> Option<Value> {
    match kind {
        HyperparameterKind::Categorical(_) => v.as_str().map(|s| Value::Text(s.to_string())),
        HyperparameterKind::Boolean => v.as_bool().map(Value::Bool),
        HyperparameterKind::Integer { .. } => v.as_i64().map(Value::Int),
        HyperparameterKind::Real { .. } => v.as_f64().map(Value::Real),
    }
}

fn constraint_from_json(v: &Json, path: &str) -> Result<ConstraintSpec, SpaceError> {
    let obj = as_object(v, path)?;
    let name = str_field(obj, path, "metric")?;
    let metric = match name.parse::<Metric>() {
        Ok(m) if m.is_constrainable() => m,
        _ => {
            return Err(schema(
                &format!("{path}/metric"),
                format!("expected \"group_disparity\" or \"prediction_time\", got {name:?}"),
            ))
        }
    };
    Ok(ConstraintSpec {
        metric,
        threshold: num_field(obj, path, "threshold")?,
    })
}

fn bad_name(name: &str) -> Option<&'static str> {
    if name.trim().is_empty() {
        Some("name must not be empty")
    } else if name.contains(['/', ':', ',']) {
        Some("name must not contain '/', ':' or ','")
    } else {
        None
    }
}

/// Lists every invariant the space breaks. Empty means valid.
pub fn validate_space(space: &SearchSpace) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: String, message: String| out.push(Violation { path, message });

    if space.slots.is_empty() {
        push("/slots".into(), "space must have at least one slot".into());
    }
    let estimators: Vec<usize> = space
        .slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role == Role::Estimator)
        .map(|(i, _)| i)
        .collect();
    match estimators.as_slice() {
        [] if !space.slots.is_empty() => push(
            "/slots".into(),
            "space must have exactly one estimator slot".into(),
        ),
        [] => {}
        [i] => {
            if *i + 1 != space.slots.len() {
                push(
                    format!("/slots/{}", space.slots[*i].name),
                    "estimator slot must be last".into(),
                );
            }
        }
        _ => push(
            "/slots".into(),
            "space must have exactly one estimator slot".into(),
        ),
    }

    let mut slot_names = HashSet::new();
    for slot in &space.slots {
        let sp = format!("/slots/{}", slot.name);
        if let Some(msg) = bad_name(&slot.name) {
            push(sp.clone(), msg.into());
        }
        if RESERVED_NAMES.contains(&slot.name.as_str()) {
            push(sp.clone(), "slot name collides with a metric axis".into());
        }
        if !slot_names.insert(slot.name.as_str()) {
            push(sp.clone(), "duplicate slot name".into());
        }
        if slot.components.is_empty() {
            push(sp.clone(), "slot must offer at least one component".into());
        }
        let mut component_names = HashSet::new();
        for comp in &slot.components {
            let cp = format!("{sp}/{}", comp.name);
            if let Some(msg) = bad_name(&comp.name) {
                push(cp.clone(), msg.into());
            }
            if !component_names.insert(comp.name.as_str()) {
                push(
                    sp.clone(),
                    format!("duplicate component `{}` in slot", comp.name),
                );
            }
            if comp.role != slot.role {
                push(
                    cp.clone(),
                    format!(
                        "component role {} does not match slot role {}",
                        comp.role.as_str(),
                        slot.role.as_str()
                    ),
                );
            }
            let mut hp_names = HashSet::new();
            for hp in &comp.hyperparameters {
                let hpp = format!("{cp}/{}", hp.name);
                if hp.name.is_empty() || hp.name.contains('/') {
                    push(
                        hpp.clone(),
                        "hyperparameter name must be non-empty and free of '/'".into(),
                    );
                }
                if !hp_names.insert(hp.name.as_str()) {
                    push(
                        cp.clone(),
                        format!("duplicate hyperparameter `{}`", hp.name),
                    );
                }
                for msg in kind_violations(hp) {
                    push(hpp.clone(), msg);
                }
            }
        }
    }

    let mut seen = HashSet::new();
    for (i, c) in space.constraints.iter().enumerate() {
        let path = format!("/constraints/{i}");
        if !c.metric.is_constrainable() {
            push(
                path.clone(),
                format!("metric {} cannot be constrained", c.metric),
            );
        }
        if !seen.insert(c.metric) {
            push(
                path.clone(),
                format!("more than one constraint on {}", c.metric),
            );
        }
        let ok = match c.metric {
            Metric::GroupDisparity => (0.0..=1.0).contains(&c.threshold),
            _ => c.threshold.is_finite() && c.threshold > 0.0,
        };
        if !ok {
            push(
                path,
                format!("threshold {} out of range for {}", c.threshold, c.metric),
            );
        }
    }
    out
}

fn kind_violations(hp: &HyperparameterSpec) -> Vec<String> {
    let mut out = Vec::new();
    match &hp.kind {
        HyperparameterKind::Integer { min, max } => {
            if min >= max {
                out.push(format!(
                    "integer range requires min < max, got [{min}, {max}]"
                ));
            }
        }
        HyperparameterKind::Real { min, max, scale } => {
            if !(min.is_finite() && max.is_finite()) || min >= max {
                out.push(format!(
                    "real range requires finite min < max, got [{min}, {max}]"
                ));
            }
            if *scale == Scale::Log && *min <= 0.0 {
                out.push("log scale requires min > 0".into());
            }
        }
        HyperparameterKind::Categorical(values) => {
            let distinct: HashSet<&String> = values.iter().collect();
            if distinct.len() < 2 {
                out.push("categorical needs at least 2 distinct values".into());
            }
            if distinct.len() != values.len() {
                out.push("categorical values must be distinct".into());
            }
        }
        HyperparameterKind::Boolean => {}
    }
    if out.is_empty() && !hp.kind.admits(&hp.default) {
        out.push(format!("default {} is not in the domain", hp.default));
    }
    out
}

/// Renders a space back to its file form.
pub fn space_to_json(space: &SearchSpace) -> Json {
    let slots: Vec<Json> = space
        .slots
        .iter()
        .map(|slot| {
            let components: Vec<Json> = slot
                .components
                .iter()
                .map(|c| {
                    let hps: Vec<Json> = c
                        .hyperparameters
                        .iter()
                        .map(hyperparameter_to_json)
                        .collect();
                    json!({"name": c.name, "role": c.role.as_str(), "hyperparameters": hps})
                })
                .collect();
            json!({"name": slot.name, "role": slot.role.as_str(), "components": components})
        })
        .collect();
    let constraints: Vec<Json> = space
        .constraints
        .iter()
        .map(|c| json!({"metric": c.metric.as_str(), "threshold": c.threshold}))
        .collect();
    json!({"slots": slots, "constraints": constraints})
}

fn hyperparameter_to_json(hp: &HyperparameterSpec) -> Json {
    let mut obj = Map::new();
    obj.insert("name".into(), json!(hp.name));
    obj.insert("kind".into(), json!(hp.kind.tag()));
    match &hp.kind {
        HyperparameterKind::Categorical(values) => {
            obj.insert("values".into(), json!(values));
        }
        HyperparameterKind::Boolean => {}
        HyperparameterKind::Integer { min, max } => {
            obj.insert("min".into(), json!(min));
            obj.insert("max".into(), json!(max));
        }
        HyperparameterKind::Real { min, max, scale } => {
            obj.insert("min".into(), json!(min));
            obj.insert("max".into(), json!(max));
            obj.insert("scale".into(), json!(scale));
        }
    }
    obj.insert(
        "default".into(),
        serde_json::to_value(&hp.default).expect("value serializes"),
    );
    Json::Object(obj)
}

/// Pretty-printed space file.
pub fn serialize_space(space: &SearchSpace) -> String {
    serde_json::to_string_pretty(&space_to_json(space)).expect("space serializes")
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the compact canonical space document, hex encoded.
pub fn space_hash(space: &SearchSpace) -> String {
    let canonical = serde_json::to_string(&space_to_json(space)).expect("space serializes");
    sha256_hex(canonical.as_bytes())
}

/// Number of distinct structures: product of component counts per slot,
/// saturating at `u64::MAX`.
pub fn count_structures(space: &SearchSpace) -> u64 {
    space
        .slots
        .iter()
        .fold(1u64, |acc, s| acc.saturating_mul(s.components.len() as u64))
}

/// Configuration for `structure` (one component name per slot) with every
/// hyperparameter at its declared default.
pub fn default_configuration<S: AsRef<str>>(
    space: &SearchSpace,
    structure: &[S],
) -> Result<Configuration, SpaceError> {
    if structure.len() != space.slots.len() {
        return Err(SpaceError::StructureArity {
            expected: space.slots.len(),
            got: structure.len(),
        });
    }
    let mut config = Configuration {
        structure: IndexMap::new(),
        assignment: IndexMap::new(),
    };
    for (slot, name) in space.slots.iter().zip(structure) {
        let name = name.as_ref();
        let comp = slot
            .component(name)
            .ok_or_else(|| SpaceError::UnknownComponent {
                slot: slot.name.clone(),
                name: name.to_string(),
            })?;
        config
            .structure
            .insert(slot.name.clone(), comp.name.clone());
        config.assignment.insert(
            slot.name.clone(),
            comp.hyperparameters
                .iter()
                .map(|h| (h.name.clone(), h.default.clone()))
                .collect(),
        );
    }
    Ok(config)
}
