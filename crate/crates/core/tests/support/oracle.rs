//! Linear-scan answers computed straight from a JSONL run log.
//!
//! Nothing here touches the library's model types: the log is read as plain
//! JSON and every answer is recomputed from the raw records.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value as Json;

pub const METRICS: [&str; 4] = [
    "group_disparity",
    "prediction_time",
    "roc_auc_train",
    "roc_auc_holdout",
];

pub struct LogOracle {
    header: Json,
    rows: Vec<Json>,
}

fn lower_is_better(metric: &str) -> bool {
    metric == "group_disparity" || metric == "prediction_time"
}

impl LogOracle {
    pub fn from_text(text: &str) -> Self {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = serde_json::from_str(lines.next().expect("header line")).unwrap();
        let rows = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
        Self { header, rows }
    }

    fn slots(&self) -> &Vec<Json> {
        self.header["space"]["slots"].as_array().unwrap()
    }

    pub fn slot_names(&self) -> Vec<String> {
        self.slots()
            .iter()
            .map(|s| s["name"].as_str().unwrap().to_string())
            .collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r["id"].as_str().unwrap().to_string())
            .collect()
    }

    /// Every component name in declaration order, once.
    pub fn component_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for slot in self.slots() {
            for comp in slot["components"].as_array().unwrap() {
                let name = comp["name"].as_str().unwrap().to_string();
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }

    fn component(&self, name: &str) -> Option<&Json> {
        self.slots()
            .iter()
            .flat_map(|s| s["components"].as_array().unwrap())
            .find(|c| c["name"] == name)
    }

    fn estimator_of(row: &Json) -> String {
        let structure = row["structure"].as_object().unwrap();
        structure
            .values()
            .last()
            .unwrap()
            .as_str()
            .unwrap()
            .to_string()
    }

    fn metric_value(row: &Json, metric: &str) -> f64 {
        row["metrics"][metric].as_f64().unwrap()
    }

    pub fn count_pipelines(&self) -> usize {
        self.rows.len()
    }

    pub fn count_steps(&self) -> usize {
        self.slots().len()
    }

    pub fn distinct(&self, slot: &str) -> usize {
        self.rows
            .iter()
            .filter_map(|r| r["structure"][slot].as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn metric(&self, id: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r["id"] == id)
            .map(|r| Self::metric_value(r, metric))
    }

    /// Estimator with the best per-estimator maximum (or mean), where
    /// "best" is the lowest value for disparity and latency.
    pub fn best_estimator(&self, metric: &str, mean: bool) -> Option<String> {
        let better = |a: f64, b: f64| {
            if lower_is_better(metric) {
                a < b
            } else {
                a > b
            }
        };
        // name -> (score, seq deciding ties)
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            let e = Self::estimator_of(r);
            if !names.contains(&e) {
                names.push(e);
            }
        }
        let mut best: Option<(String, f64, u64)> = None;
        for name in names {
            let rows: Vec<&Json> = self
                .rows
                .iter()
                .filter(|r| Self::estimator_of(r) == name)
                .collect();
            let (score, seq) = if mean {
                let total: f64 = rows.iter().map(|r| Self::metric_value(r, metric)).sum();
                (total / rows.len() as f64, rows[0]["seq"].as_u64().unwrap())
            } else {
                let mut pick = rows[0];
                for r in &rows[1..] {
                    if better(
                        Self::metric_value(r, metric),
                        Self::metric_value(pick, metric),
                    ) {
                        pick = r;
                    }
                }
                (
                    Self::metric_value(pick, metric),
                    pick["seq"].as_u64().unwrap(),
                )
            };
            let replace = match &best {
                None => true,
                Some((_, s, q)) => better(score, *s) || (score == *s && seq < *q),
            };
            if replace {
                best = Some((name, score, seq));
            }
        }
        best.map(|b| b.0)
    }

    /// `(metric, threshold)` pairs declared in the log's space.
    pub fn declared_constraints(&self) -> Vec<(String, f64)> {
        self.header["space"]["constraints"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| {
                (
                    c["metric"].as_str().unwrap().to_string(),
                    c["threshold"].as_f64().unwrap(),
                )
            })
            .collect()
    }

    pub fn constrained(&self, constraints: &[(String, f64)]) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| {
                constraints
                    .iter()
                    .all(|(m, t)| Self::metric_value(r, m) <= *t)
            })
            .map(|r| r["id"].as_str().unwrap().to_string())
            .collect()
    }

    /// Usage counts over all slots of `role`, zero counts dropped, most
    /// frequent first and declaration order among ties.
    pub fn frequency(&self, role: &str) -> Vec<(String, usize)> {
        let slots: Vec<&Json> = self.slots().iter().filter(|s| s["role"] == role).collect();
        let mut order: Vec<String> = Vec::new();
        for s in &slots {
            for c in s["components"].as_array().unwrap() {
                let n = c["name"].as_str().unwrap().to_string();
                if !order.contains(&n) {
                    order.push(n);
                }
            }
        }
        let mut counted: Vec<(String, usize)> = order
            .into_iter()
            .map(|name| {
                let mut n = 0;
                for r in &self.rows {
                    for s in &slots {
                        if r["structure"][s["name"].as_str().unwrap()] == name.as_str() {
                            n += 1;
                        }
                    }
                }
                (name, n)
            })
            .filter(|(_, n)| *n > 0)
            .collect();
        // insertion sort, stable by construction
        for i in 1..counted.len() {
            let mut j = i;
            while j > 0 && counted[j - 1].1 < counted[j].1 {
                counted.swap(j - 1, j);
                j -= 1;
            }
        }
        counted
    }

    pub fn hp_count(&self, component: &str) -> Option<usize> {
        self.component(component)
            .map(|c| c["hyperparameters"].as_array().unwrap().len())
    }

    /// Scores per hyperparameter and the winner, or `None` with fewer than
    /// two uses.
    pub fn influence(
        &self,
        component: &str,
        slot: Option<&str>,
        metric: &str,
    ) -> Option<(Vec<(String, f64)>, Option<String>)> {
        let spec = self.component(component)?;
        let mut uses: Vec<(&Json, f64)> = Vec::new();
        for r in &self.rows {
            for (slot_name, used) in r["structure"].as_object().unwrap() {
                if used != component || slot.is_some_and(|s| s != slot_name) {
                    continue;
                }
                uses.push((&r["assignment"][slot_name], Self::metric_value(r, metric)));
            }
        }
        if uses.len() < 2 {
            return None;
        }
        let ys: Vec<f64> = uses.iter().map(|u| u.1).collect();
        let mut scores = Vec::new();
        for hp in spec["hyperparameters"].as_array().unwrap() {
            let name = hp["name"].as_str().unwrap();
            let kind = hp["kind"].as_str().unwrap();
            let score = if kind == "integer" || kind == "real" {
                let lo = hp["min"].as_f64().unwrap();
                let hi = hp["max"].as_f64().unwrap();
                let log = hp.get("scale").and_then(Json::as_str) == Some("log");
                let xs: Vec<f64> = uses
                    .iter()
                    .map(|(a, _)| {
                        let v = a[name].as_f64().unwrap();
                        if log {
                            (v.ln() - lo.ln()) / (hi.ln() - lo.ln())
                        } else {
                            (v - lo) / (hi - lo)
                        }
                    })
                    .collect();
                pearson_abs(&xs, &ys)
            } else {
                let keys: Vec<String> = uses.iter().map(|(a, _)| a[name].to_string()).collect();
                eta_squared(&keys, &ys)
            };
            scores.push((name.to_string(), score));
        }
        let mut winner: Option<(String, f64)> = None;
        for (n, s) in &scores {
            if winner.as_ref().is_none_or(|w| *s > w.1) {
                winner = Some((n.clone(), *s));
            }
        }
        let top = winner.map(|w| w.1);
        let winner = scores
            .iter()
            .find(|(_, s)| top.is_some_and(|t| t - s <= 1e-12))
            .map(|(n, _)| (n.clone(), 0.0));
        Some((scores, winner.map(|w| w.0)))
    }

    /// `(max, min, max - min)`.
    pub fn spread(&self, metric: &str) -> Option<(f64, f64, f64)> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .map(|r| Self::metric_value(r, metric))
            .collect();
        let hi = vals.iter().cloned().reduce(f64::max)?;
        let lo = vals.iter().cloned().reduce(f64::min)?;
        Some((hi, lo, hi - lo))
    }

    /// Ids by repeated selection of the highest holdout AUC, lowest seq
    /// first among equals.
    pub fn leaderboard(&self) -> Vec<String> {
        let mut left: Vec<&Json> = self.rows.iter().collect();
        let mut out = Vec::new();
        while !left.is_empty() {
            let mut pick = 0;
            for i in 1..left.len() {
                let a = Self::metric_value(left[i], "roc_auc_holdout");
                let b = Self::metric_value(left[pick], "roc_auc_holdout");
                let (sa, sb) = (left[i]["seq"].as_u64(), left[pick]["seq"].as_u64());
                if a > b || (a == b && sa < sb) {
                    pick = i;
                }
            }
            out.push(left.remove(pick)["id"].as_str().unwrap().to_string());
        }
        out
    }
}

fn pearson_abs(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.iter().all(|x| *x == xs[0]) || ys.iter().all(|y| *y == ys[0]) {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / n;
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n).sqrt();
    (cov / (sx * sy)).abs().min(1.0)
}

/// `1 - SS_within / SS_total`.
fn eta_squared(keys: &[String], ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let my = ys.iter().sum::<f64>() / n;
    let total: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if ys.iter().all(|y| *y == ys[0]) {
        return 0.0;
    }
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (k, y) in keys.iter().zip(ys) {
        groups.entry(k.as_str()).or_default().push(*y);
    }
    let within: f64 = groups
        .values()
        .map(|g| {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|y| (y - m).powi(2)).sum::<f64>()
        })
        .sum();
    (1.0 - within / total).clamp(0.0, 1.0)
}
