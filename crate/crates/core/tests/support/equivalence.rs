//! Every query kind checked against the log oracle.

use std::collections::BTreeMap;

use cpcboard_core::query::{run_query, QueryParams};
use cpcboard_core::{write_run_log, RunSnapshot};
use serde_json::Value as Json;

use super::oracle::{LogOracle, METRICS};

pub const TOLERANCE: f64 = 1e-12;

fn params(pairs: &[(&str, &str)]) -> QueryParams {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE
}

/// Mismatches between the query API on `snapshot` and the oracle over the
/// snapshot's own JSONL log, plus the number of comparisons made.
pub fn mismatches(snapshot: &RunSnapshot) -> (Vec<String>, usize) {
    mismatches_against(snapshot, &write_run_log(snapshot))
}

/// Same, with the oracle reading `log`, e.g. a file written by the CLI.
pub fn mismatches_against(snapshot: &RunSnapshot, log: &str) -> (Vec<String>, usize) {
    let oracle = LogOracle::from_text(log);
    let mut bad = Vec::new();
    let mut checks = 0usize;
    let mut q = |name: &str, p: QueryParams| -> Option<Json> {
        checks += 1;
        run_query(snapshot, name, &p).ok()
    };
    let mut expect = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };

    let got = q("count_pipelines", params(&[]));
    expect(
        got.as_ref().and_then(|v| v["count"].as_u64()) == Some(oracle.count_pipelines() as u64),
        format!("count_pipelines: {got:?}"),
    );
    let got = q("count_steps", params(&[]));
    expect(
        got.as_ref().and_then(|v| v["count"].as_u64()) == Some(oracle.count_steps() as u64),
        format!("count_steps: {got:?}"),
    );
    for slot in oracle.slot_names() {
        let got = q("distinct_components", params(&[("slot", &slot)]));
        expect(
            got.as_ref().and_then(|v| v["count"].as_u64()) == Some(oracle.distinct(&slot) as u64),
            format!("distinct_components {slot}: {got:?}"),
        );
    }
    for id in oracle.ids() {
        for metric in METRICS {
            let got = q(
                "metric_of",
                params(&[("pipeline", &id), ("metric", metric)]),
            );
            let want = oracle.metric(&id, metric).unwrap();
            expect(
                got.as_ref()
                    .and_then(|v| v["value"].as_f64())
                    .is_some_and(|v| close(v, want)),
                format!("metric_of {id} {metric}: {got:?} vs {want}"),
            );
        }
    }
    for metric in METRICS {
        for (aggregation, mean) in [("max", false), ("mean", true)] {
            let got = q(
                "best_estimator",
                params(&[("metric", metric), ("aggregation", aggregation)]),
            );
            let want = oracle.best_estimator(metric, mean);
            expect(
                got.as_ref()
                    .and_then(|v| v["estimator"].as_str().map(String::from))
                    == want,
                format!("best_estimator {metric} {aggregation}: {got:?} vs {want:?}"),
            );
        }
    }
    let declared = oracle.declared_constraints();
    let got = q("constrained", params(&[]));
    let want = oracle.constrained(&declared);
    expect(
        got.as_ref().map(|v| v["pipelines"].clone()) == Some(serde_json::json!(want)),
        format!("constrained: {got:?} vs {want:?}"),
    );
    for (d, t) in [("0.05", "0.2"), ("1", "10"), ("0", "0.0001")] {
        let got = q(
            "constrained",
            params(&[("max_group_disparity", d), ("max_prediction_time", t)]),
        );
        let want = oracle.constrained(&[
            ("group_disparity".into(), d.parse().unwrap()),
            ("prediction_time".into(), t.parse().unwrap()),
        ]);
        expect(
            got.as_ref().map(|v| v["pipelines"].clone()) == Some(serde_json::json!(want)),
            format!("constrained {d}/{t}: {got:?} vs {want:?}"),
        );
    }
    for role in ["transformer", "estimator"] {
        let got = q("frequency", params(&[("role", role)]));
        let want: Vec<Json> = oracle
            .frequency(role)
            .into_iter()
            .map(|(c, n)| serde_json::json!({"component": c, "count": n}))
            .collect();
        expect(
            got.as_ref().map(|v| v["counts"].clone()) == Some(Json::Array(want.clone())),
            format!("frequency {role}: {got:?} vs {want:?}"),
        );
    }
    let slots: Vec<Option<String>> = std::iter::once(None)
        .chain(oracle.slot_names().into_iter().map(Some))
        .collect();
    for component in oracle.component_names() {
        let got = q("hp_count", params(&[("component", &component)]));
        expect(
            got.as_ref().and_then(|v| v["count"].as_u64())
                == oracle.hp_count(&component).map(|n| n as u64),
            format!("hp_count {component}: {got:?}"),
        );
        for metric in METRICS {
            for slot in &slots {
                let mut p = params(&[("component", &component), ("metric", metric)]);
                if let Some(s) = slot {
                    p.insert("slot".into(), s.clone());
                }
                let got = q("influence", p);
                let want = oracle.influence(&component, slot.as_deref(), metric);
                let applicable = slot.as_ref().is_none_or(|s| {
                    snapshot
                        .space
                        .slot(s)
                        .is_some_and(|st| st.component(&component).is_some())
                });
                let ok = match (&got, &want) {
                    (None, None) => true,
                    (Some(_), None) => false,
                    (None, Some(_)) => !applicable,
                    (Some(v), Some((scores, winner))) => {
                        let got_scores: BTreeMap<String, f64> = v["scores"]
                            .as_array()
                            .unwrap()
                            .iter()
                            .map(|s| {
                                (
                                    s["hyperparameter"].as_str().unwrap().to_string(),
                                    s["score"].as_f64().unwrap(),
                                )
                            })
                            .collect();
                        got_scores.len() == scores.len()
                            && scores
                                .iter()
                                .all(|(n, s)| got_scores.get(n).is_some_and(|g| close(*g, *s)))
                            && v["winner"].as_str().map(String::from) == *winner
                    }
                };
                expect(
                    ok,
                    format!("influence {component} {slot:?} {metric}: {got:?} vs {want:?}"),
                );
            }
        }
    }
    for metric in METRICS {
        let got = q("spread", params(&[("metric", metric)]));
        let want = oracle.spread(metric);
        let ok = match (&got, want) {
            (Some(v), Some((hi, lo, d))) => {
                close(v["best"].as_f64().unwrap(), hi)
                    && close(v["worst"].as_f64().unwrap(), lo)
                    && close(v["difference"].as_f64().unwrap(), d)
            }
            (None, None) => true,
            _ => false,
        };
        expect(ok, format!("spread {metric}: {got:?} vs {want:?}"));
    }
    let got = q("leaderboard", params(&[]));
    let ids: Option<Vec<String>> = got.as_ref().and_then(|v| {
        v.as_array().map(|rows| {
            rows.iter()
                .map(|r| r["id"].as_str().unwrap().to_string())
                .collect()
        })
    });
    expect(
        ids == Some(oracle.leaderboard()),
        format!("leaderboard: {ids:?}"),
    );
    (bad, checks)
}
