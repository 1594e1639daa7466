//! Named query dispatch shared by the CLI and the HTTP API.
//!
//! Every query takes string parameters and returns a JSON result.

use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

use crate::analytics::{self, Aggregation, QueryError};
use crate::metric::Metric;
use crate::search::RunSnapshot;
use crate::search_space::{ConstraintSpec, Role};

pub const QUERY_NAMES: [&str; 11] = [
    "count_pipelines",
    "count_steps",
    "distinct_components",
    "metric_of",
    "best_estimator",
    "constrained",
    "frequency",
    "hp_count",
    "influence",
    "spread",
    "leaderboard",
];

/// Query parameters as passed on the command line or in a query string.
pub type QueryParams = BTreeMap<String, String>;

fn required<'a>(params: &'a QueryParams, name: &str) -> Result<&'a str, QueryError> {
    params
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| QueryError::BadParameter {
            name: name.to_string(),
            message: "missing".into(),
        })
}

fn metric_param(params: &QueryParams, default: Metric) -> Result<Metric, QueryError> {
    match params.get("metric") {
        None => Ok(default),
        Some(m) => Ok(m.parse()?),
    }
}

fn threshold_param(params: &QueryParams, name: &str) -> Result<Option<f64>, QueryError> {
    params
        .get(name)
        .map(|v| {
            v.parse::<f64>().map_err(|e| QueryError::BadParameter {
                name: name.to_string(),
                message: e.to_string(),
            })
        })
        .transpose()
}

/// Constraints of the run's space, with `max_group_disparity` and
/// `max_prediction_time` overriding or adding thresholds.
pub fn constraints_from(
    snapshot: &RunSnapshot,
    params: &QueryParams,
) -> Result<Vec<ConstraintSpec>, QueryError> {
    let mut constraints = snapshot.space.constraints.clone();
    for (name, metric) in [
        ("max_group_disparity", Metric::GroupDisparity),
        ("max_prediction_time", Metric::PredictionTime),
    ] {
        if let Some(threshold) = threshold_param(params, name)? {
            constraints.retain(|c| c.metric != metric);
            constraints.push(ConstraintSpec { metric, threshold });
        }
    }
    Ok(constraints)
}

/// Runs query `name` against `snapshot`.
///
/// Parameters: `slot` (distinct_components, influence), `pipeline` and
/// `metric` (metric_of), `metric` and `aggregation` (best_estimator, default
/// training ROC AUC), `role` (frequency), `component` (hp_count, influence),
/// `metric` (influence and spread, default holdout ROC AUC), and the
/// threshold overrides of [`constraints_from`] (constrained).
pub fn run_query(
    snapshot: &RunSnapshot,
    name: &str,
    params: &QueryParams,
) -> Result<Json, QueryError> {
    Ok(match name {
        "count_pipelines" => json!({"count": analytics::count_pipelines(snapshot)}),
        "count_steps" => json!({"count": analytics::count_steps(&snapshot.space)}),
        "distinct_components" => {
            let slot = required(params, "slot")?;
            json!({"slot": slot, "count": analytics::distinct_components(snapshot, slot)?})
        }
        "metric_of" => {
            let pipeline = required(params, "pipeline")?;
            let metric = required(params, "metric")?;
            let value = analytics::metric_of(snapshot, pipeline, metric)?;
            json!({"pipeline": pipeline, "metric": metric, "value": value})
        }
        "best_estimator" => {
            let metric = metric_param(params, Metric::RocAucTrain)?;
            let aggregation = match params.get("aggregation").map(String::as_str) {
                None | Some("max") => Aggregation::Max,
                Some("mean") => Aggregation::Mean,
                Some(other) => {
                    return Err(QueryError::BadParameter {
                        name: "aggregation".into(),
                        message: format!("expected max or mean, got {other}"),
                    })
                }
            };
            let estimator = analytics::best_estimator(snapshot, metric, aggregation)?;
            json!({"metric": metric, "aggregation": aggregation, "estimator": estimator})
        }
        "constrained" => {
            let constraints = constraints_from(snapshot, params)?;
            let ids = analytics::constrained_pipelines(snapshot, &constraints);
            json!({"constraints": constraints, "any": !ids.is_empty(), "pipelines": ids})
        }
        "frequency" => {
            let role = required(params, "role")?;
            let role = Role::parse(role).ok_or_else(|| QueryError::BadParameter {
                name: "role".into(),
                message: format!("expected transformer or estimator, got {role}"),
            })?;
            json!({"role": role, "counts": analytics::component_frequency(snapshot, role)})
        }
        "hp_count" => {
            let component = required(params, "component")?;
            json!({"component": component,
                   "count": analytics::hyperparameter_count(&snapshot.space, component)?})
        }
        "influence" => {
            let component = required(params, "component")?;
            let metric = metric_param(params, Metric::RocAucHoldout)?;
            let slot = params.get("slot").map(String::as_str);
            serde_json::to_value(analytics::influence(snapshot, component, slot, metric)?)
                .expect("report serializes")
        }
        "spread" => {
            let metric = metric_param(params, Metric::RocAucHoldout)?;
            let s = analytics::metric_spread(snapshot, metric)?;
            json!({"metric": metric, "best": s.best, "worst": s.worst, "difference": s.difference})
        }
        "leaderboard" => {
            serde_json::to_value(analytics::leaderboard(snapshot)).expect("rows serialize")
        }
        other => return Err(QueryError::UnknownQuery(other.to_string())),
    })
}
